#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace plato {

// Dense row-major matrix. Real is float in fast mode, double in checking mode.
template <class Real>
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<Real> data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, Real{0}) {}

    void resize(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<std::size_t>(r) * c, Real{0});
    }

    Real& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    Real operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    Real* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const Real* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    std::span<Real> row_span(int r) { return {row(r), static_cast<std::size_t>(cols)}; }
    std::span<const Real> row_span(int r) const { return {row(r), static_cast<std::size_t>(cols)}; }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor2& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

template <class Real, class From>
Tensor2<Real> cast_tensor(const Tensor2<From>& src) {
    Tensor2<Real> out(src.rows, src.cols);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        out.data[i] = static_cast<Real>(src.data[i]);
    }
    return out;
}

}  // namespace plato
