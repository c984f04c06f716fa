#pragma once

#include <cstddef>
#include <vector>

namespace causal {

// Dense column-major matrix; samples are rows, variables are columns, so a
// variable is a contiguous span for the numeric kernels.
struct ColMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    ColMatrix() = default;
    ColMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
    double at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
    double* col(std::size_t c) { return data.data() + c * rows; }
    const double* col(std::size_t c) const { return data.data() + c * rows; }

    bool operator==(const ColMatrix&) const = default;
};

}  // namespace causal
