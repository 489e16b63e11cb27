#include "mofq/tensor.hpp"
#include "mofq/errors.hpp"

#include <cmath>

namespace mofq {

tensor tensor::zeros(std::vector<int64_t> shape) {
    tensor t{std::move(shape), {}};
    t.data.assign(static_cast<size_t>(t.numel()), 0.0f);
    return t;
}

tensor tensor::from(std::vector<int64_t> shape, std::vector<float> data) {
    tensor t{std::move(shape), std::move(data)};
    validate_tensor(t, "tensor");
    return t;
}

void validate_tensor(const tensor& t, const std::string& what) {
    if (t.shape.empty()) throw value_error(what + ": empty shape");
    for (auto d : t.shape) {
        if (d <= 0) throw value_error(what + ": non-positive dimension in " + shape_str(t.shape));
    }
    if (t.numel() != static_cast<int64_t>(t.data.size())) {
        throw value_error(what + ": shape " + shape_str(t.shape) + " does not match " +
                          std::to_string(t.data.size()) + " elements");
    }
    for (float v : t.data) {
        if (!std::isfinite(v)) throw value_error(what + ": non-finite element");
    }
}

int64_t stride_of(const tensor& t, int axis) {
    int64_t s = 1;
    for (int a = t.rank() - 1; a > axis; --a) s *= t.dim(a);
    return s;
}

bool same_shape(const tensor& a, const tensor& b) {
    return a.shape == b.shape;
}

std::string shape_str(const std::vector<int64_t>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

} // namespace mofq
