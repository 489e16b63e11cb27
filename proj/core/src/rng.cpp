#include "mofq/rng.hpp"
#include "mofq/errors.hpp"

#include <cmath>
#include <charconv>
#include <numbers>

namespace mofq {

uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t tag) {
    uint64_t s = base;
    (void)splitmix64_next(s);
    s ^= 0x6a09e667f3bcc909ull * (tag + 1);
    return splitmix64_next(s);
}

namespace {
uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
} // namespace

xoshiro256pp::xoshiro256pp(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
}

uint64_t xoshiro256pp::next() {
    uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double xoshiro256pp::next_unit() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

dist_spec dist_spec::parse(std::string_view text) {
    auto open = text.find('(');
    if (open == std::string_view::npos || !text.ends_with(")")) {
        throw parse_error("bad distribution spec: '" + std::string(text) + "'");
    }
    std::string_view name = text.substr(0, open);
    std::string_view args = text.substr(open + 1, text.size() - open - 2);

    auto next_num = [&](std::string_view& sv) {
        auto comma = sv.find(',');
        std::string_view tok = comma == std::string_view::npos ? sv : sv.substr(0, comma);
        sv = comma == std::string_view::npos ? std::string_view{} : sv.substr(comma + 1);
        double v;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size()) {
            throw parse_error("bad number '" + std::string(tok) + "' in distribution spec");
        }
        return v;
    };

    dist_spec d;
    if (name == "uniform") {
        d.which = kind::uniform;
        d.a = next_num(args);
        d.b = next_num(args);
        if (!(d.a < d.b)) throw parse_error("uniform: need lo < hi");
    } else if (name == "gaussian" || name == "lognormal") {
        d.which = name == "gaussian" ? kind::gaussian : kind::lognormal;
        d.a = next_num(args);
        d.b = next_num(args);
        if (!(d.b > 0)) throw parse_error(std::string(name) + ": sigma must be positive");
    } else if (name == "student_t") {
        d.which = kind::student_t;
        d.a = next_num(args);
        d.b = 0;
        if (!(d.a > 0)) throw parse_error("student_t: df must be positive");
    } else {
        throw parse_error("unknown distribution '" + std::string(name) + "'");
    }
    if (!args.empty()) throw parse_error("too many arguments in distribution spec");
    return d;
}

std::string dist_spec::str() const {
    auto num = [](double v) {
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    switch (which) {
        case kind::uniform:   return "uniform(" + num(a) + "," + num(b) + ")";
        case kind::gaussian:  return "gaussian(" + num(a) + "," + num(b) + ")";
        case kind::lognormal: return "lognormal(" + num(a) + "," + num(b) + ")";
        case kind::student_t: return "student_t(" + num(a) + ")";
    }
    return "";
}

tensor gen_synthetic(const dist_spec& spec, std::vector<int64_t> shape, uint64_t seed) {
    tensor t = tensor::zeros(std::move(shape));
    xoshiro256pp rng(seed);

    auto gauss = [&] {
        double u1 = rng.next_unit();
        double u2 = rng.next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };

    for (auto& out : t.data) {
        double v = 0;
        switch (spec.which) {
            case dist_spec::kind::uniform:
                v = spec.a + (spec.b - spec.a) * rng.next_unit();
                break;
            case dist_spec::kind::gaussian:
                v = spec.a + spec.b * gauss();
                break;
            case dist_spec::kind::lognormal: {
                double z = gauss();
                double s = rng.next_unit() < 0.5 ? -1.0 : 1.0;
                v = s * std::exp(spec.a + spec.b * z);
                break;
            }
            case dist_spec::kind::student_t: {
                double u1 = rng.next_unit();
                double u2 = rng.next_unit();
                v = std::sqrt(spec.a * (std::pow(u1, -2.0 / spec.a) - 1.0)) *
                    std::cos(2.0 * std::numbers::pi * u2);
                break;
            }
        }
        out = static_cast<float>(v);
    }
    return t;
}

} // namespace mofq
