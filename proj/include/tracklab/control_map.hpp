#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tracklab/spaces.hpp"

namespace tracklab {

/// Evaluation contract u -> S(u). Implementations must be reentrant: the
/// multistart driver and the explorer call evaluate() from several workers.
class ControlToStateMap {
 public:
  virtual ~ControlToStateMap() = default;

  virtual std::string name() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;

  /// Declared metadata only; the explorer's affinity defect is the ground truth.
  virtual bool is_affine() const { return false; }

  Vector operator()(const Vector& u) const {
    require(u.size() == input_dim(), name() + ": control has dimension " + std::to_string(u.size()) +
                                         ", expected " + std::to_string(input_dim()));
    return evaluate(u);
  }

 protected:
  virtual Vector evaluate(const Vector& u) const = 0;
};

using MapPtr = std::shared_ptr<const ControlToStateMap>;

/// S(u) = K u + c.
class AffineMap final : public ControlToStateMap {
 public:
  AffineMap(Matrix K, Vector c) : K_(std::move(K)), c_(std::move(c)) {
    require(K_.rows() > 0 && K_.cols() > 0, "affine map: empty matrix");
    require(c_.size() == K_.rows(), "affine map: offset length must equal the number of matrix rows");
  }

  static AffineMap identity(Index dim) { return AffineMap(Matrix::Identity(dim, dim), Vector::Zero(dim)); }

  std::string name() const override { return "affine"; }
  Index input_dim() const override { return K_.cols(); }
  Index output_dim() const override { return K_.rows(); }
  bool is_affine() const override { return true; }

  const Matrix& matrix() const { return K_; }
  const Vector& offset() const { return c_; }

 protected:
  Vector evaluate(const Vector& u) const override { return K_ * u + c_; }

 private:
  Matrix K_;
  Vector c_;
};

inline Vector eval_affine(const AffineMap& m, const Vector& u) { return m(u); }
inline Vector eval_abs(const Vector& u) { return u.cwiseAbs(); }
inline Vector eval_square(const Vector& u) { return u.cwiseAbs2(); }

/// Componentwise |u|, the prototypical even non-affine map.
class AbsMap final : public ControlToStateMap {
 public:
  explicit AbsMap(Index dim = 1) : dim_(dim) { require(dim > 0, "abs map: dimension must be positive"); }
  std::string name() const override { return "abs"; }
  Index input_dim() const override { return dim_; }
  Index output_dim() const override { return dim_; }

 protected:
  Vector evaluate(const Vector& u) const override { return eval_abs(u); }

 private:
  Index dim_;
};

/// Componentwise u^2. Smooth and even, so u_d = 0 targets have +/- minimizer pairs.
class SquareMap final : public ControlToStateMap {
 public:
  explicit SquareMap(Index dim = 1) : dim_(dim) { require(dim > 0, "square map: dimension must be positive"); }
  std::string name() const override { return "square"; }
  Index input_dim() const override { return dim_; }
  Index output_dim() const override { return dim_; }

 protected:
  Vector evaluate(const Vector& u) const override { return eval_square(u); }

 private:
  Index dim_;
};

/// Memoizes evaluations of an expensive map, keyed by the exact bytes of the
/// control. Thread-safe; the table is flushed when it reaches `capacity`.
class CachedMap final : public ControlToStateMap {
 public:
  explicit CachedMap(MapPtr inner, std::size_t capacity = 4096) : inner_(std::move(inner)), capacity_(capacity) {
    require(inner_ != nullptr, "cached map: null inner map");
  }

  std::string name() const override { return inner_->name(); }
  Index input_dim() const override { return inner_->input_dim(); }
  Index output_dim() const override { return inner_->output_dim(); }
  bool is_affine() const override { return inner_->is_affine(); }

  std::size_t hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return size_;
  }

 protected:
  Vector evaluate(const Vector& u) const override {
    const std::uint64_t key = hash(u);
    {
      std::lock_guard lock(mutex_);
      auto it = table_.find(key);
      if (it != table_.end()) {
        for (const auto& [control, state] : it->second) {
          if (control.size() == u.size() && std::memcmp(control.data(), u.data(), sizeof(double) * u.size()) == 0) {
            ++hits_;
            return state;
          }
        }
      }
    }
    Vector y = (*inner_)(u);
    std::lock_guard lock(mutex_);
    if (size_ >= capacity_) {
      table_.clear();
      size_ = 0;
    }
    table_[key].emplace_back(u, y);
    ++size_;
    return y;
  }

 private:
  static std::uint64_t hash(const Vector& u) {
    // FNV-1a over the raw bytes.
    std::uint64_t h = 1469598103934665603ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(u.data());
    for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(u.size()); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
    return h;
  }

  MapPtr inner_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::vector<std::pair<Vector, Vector>>> table_;
  mutable std::size_t size_ = 0;
  mutable std::size_t hits_ = 0;
};

}  // namespace tracklab
