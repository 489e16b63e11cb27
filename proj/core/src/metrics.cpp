#include "mofq/metrics.hpp"
#include "mofq/errors.hpp"

#include <cmath>

namespace mofq {

namespace {

// Neumaier variant of Kahan summation.
class compensated_sum {
  public:
    void add(double v) {
        double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) {
            c_ += (sum_ - t) + v;
        } else {
            c_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

  private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

void check_shapes(const tensor& a, const tensor& b, const char* what) {
    if (!same_shape(a, b)) {
        throw value_error(std::string(what) + ": shape mismatch " + shape_str(a.shape) +
                          " vs " + shape_str(b.shape));
    }
}

} // namespace

double mse(const tensor& a, const tensor& b) {
    check_shapes(a, b, "mse");
    compensated_sum acc;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc.add(d * d);
    }
    return acc.value() / static_cast<double>(a.data.size());
}

double nsr(const tensor& ref, const tensor& noisy) {
    check_shapes(ref, noisy, "nsr");
    compensated_sum noise, signal;
    for (size_t i = 0; i < ref.data.size(); ++i) {
        double r = ref.data[i];
        double d = r - static_cast<double>(noisy.data[i]);
        noise.add(d * d);
        signal.add(r * r);
    }
    if (signal.value() == 0.0) throw value_error("nsr: undefined NSR for all-zero reference");
    return noise.value() / signal.value();
}

const char* metric_name(error_metric_kind k) {
    switch (k) {
        case error_metric_kind::tensor_mse: return "tensor";
        case error_metric_kind::layer_output_mse: return "layer";
        case error_metric_kind::model_output_mse: return "model";
    }
    return "?";
}

error_metric_kind parse_metric(const std::string& name) {
    if (name == "tensor") return error_metric_kind::tensor_mse;
    if (name == "layer") return error_metric_kind::layer_output_mse;
    if (name == "model") return error_metric_kind::model_output_mse;
    throw parse_error("unknown error metric '" + name + "' (expected tensor|layer|model)");
}

} // namespace mofq
