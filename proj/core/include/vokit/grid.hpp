#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vokit/error.hpp"

namespace vokit {

/// Dense row-major width x height grid; `at(u, v)` addresses column u, row v.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, const T& fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}
  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) throw DimensionMismatch("grid data size mismatch");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(std::size_t u, std::size_t v) { return data_[v * width_ + u]; }
  const T& at(std::size_t u, std::size_t v) const { return data_[v * width_ + u]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <class U>
  bool same_shape(const Grid<U>& o) const noexcept {
    return width_ == o.width() && height_ == o.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;
using Mask = Grid<std::uint8_t>;

template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) throw DimensionMismatch(std::string(what) + ": grid dimensions differ");
}

}  // namespace vokit
