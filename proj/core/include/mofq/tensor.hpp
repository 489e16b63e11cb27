#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mofq {

// Dense row-major tensor of 32-bit reals. Immutable by convention once
// built; every public producer in this library returns finite elements.
struct tensor {
    std::vector<int64_t> shape;
    std::vector<float> data;

    int64_t numel() const {
        int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
    int rank() const { return static_cast<int>(shape.size()); }
    int64_t dim(int axis) const { return shape[static_cast<size_t>(axis)]; }

    static tensor zeros(std::vector<int64_t> shape);
    static tensor from(std::vector<int64_t> shape, std::vector<float> data);
};

// Throws value_error unless shape is positive, numel matches data size,
// and every element is finite.
void validate_tensor(const tensor& t, const std::string& what);

// Row-major stride of `axis`.
int64_t stride_of(const tensor& t, int axis);

bool same_shape(const tensor& a, const tensor& b);
std::string shape_str(const std::vector<int64_t>& shape);

} // namespace mofq
