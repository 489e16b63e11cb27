#include "mofq/formats.hpp"
#include "mofq/errors.hpp"

#include <cmath>
#include <charconv>

namespace mofq {

namespace {

constexpr int min_int_bits = 2;
constexpr int max_bits = 8;

// Round x >= 0 to an integer, ties to even. Exact for the magnitudes
// used here (x - floor(x) is computed without rounding below 2^52).
double round_ties_even(double x) {
    double fl = std::floor(x);
    double diff = x - fl;
    if (diff > 0.5) return fl + 1.0;
    if (diff < 0.5) return fl;
    return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

special_policy default_policy(int exp_bits, int man_bits) {
    if (exp_bits == 4 && man_bits == 3) return special_policy::fn_single_nan;
    if (exp_bits == 5 && man_bits == 2) return special_policy::ieee;
    return 1 + exp_bits + man_bits < 8 ? special_policy::reallocated
                                       : special_policy::ieee;
}

// Code of the largest finite magnitude, sign bit clear.
code_t max_finite_code(const fp_format& f) {
    uint32_t efield_top = (1u << f.exp_bits) - 1;
    uint32_t mfield_top = (1u << f.man_bits) - 1;
    switch (f.policy) {
        case special_policy::ieee:        return ((efield_top - 1) << f.man_bits) | mfield_top;
        case special_policy::reallocated: return (efield_top << f.man_bits) | mfield_top;
        case special_policy::fn_single_nan:
            return (efield_top << f.man_bits) | (mfield_top - 1);
    }
    return 0;
}

code_t encode_fp(double x, const fp_format& f) {
    bool neg = std::signbit(x);
    double a = std::fabs(x);
    code_t sign = neg ? (1u << (f.exp_bits + f.man_bits)) : 0u;

    double mf = max_finite({.desc = f});
    if (a >= mf) return sign | max_finite_code(f);
    if (a == 0.0) return 0;

    // 2^e <= a < 2^(e+1); subnormals share the first normal binade's grid.
    int e2;
    std::frexp(a, &e2);
    int e = e2 - 1;
    int e_min = 1 - f.exp_bias;
    if (e < e_min) e = e_min;

    // Scaled significand on the binade grid; both ops are exact.
    double q = std::ldexp(a, f.man_bits - e);
    auto qi = static_cast<uint32_t>(round_ties_even(q));
    if (qi == 0) return 0;
    if (qi >> (f.man_bits + 1)) { // carry into the next binade
        e += 1;
        qi = 1u << f.man_bits;
    }

    if (qi < (1u << f.man_bits)) return sign | qi; // subnormal, e == e_min
    uint32_t efield = static_cast<uint32_t>(e + f.exp_bias);
    return sign | (efield << f.man_bits) | (qi - (1u << f.man_bits));
}

code_t encode_int(double x, const int_format& f) {
    double a = std::fabs(x);
    auto qmax = f.qmax();
    int64_t q = a >= static_cast<double>(qmax)
                    ? qmax
                    : static_cast<int64_t>(round_ties_even(a));
    if (q == 0) return 0;
    if (std::signbit(x)) q = -q;
    return static_cast<code_t>(q) & ((1u << f.bits) - 1);
}

double decode_fp(code_t c, const fp_format& f) {
    uint32_t mfield = c & ((1u << f.man_bits) - 1);
    uint32_t efield = (c >> f.man_bits) & ((1u << f.exp_bits) - 1);
    bool neg = (c >> (f.exp_bits + f.man_bits)) & 1u;

    uint32_t efield_top = (1u << f.exp_bits) - 1;
    if (efield == efield_top) {
        if (f.policy == special_policy::ieee) {
            if (mfield == 0) return neg ? -INFINITY : INFINITY;
            return std::nan("");
        }
        if (f.policy == special_policy::fn_single_nan &&
            mfield == (1u << f.man_bits) - 1) {
            return std::nan("");
        }
    }

    double mag;
    if (efield == 0) {
        mag = std::ldexp(static_cast<double>(mfield), 1 - f.exp_bias - f.man_bits);
    } else {
        mag = std::ldexp(static_cast<double>((1u << f.man_bits) + mfield),
                         static_cast<int>(efield) - f.exp_bias - f.man_bits);
    }
    return neg ? -mag : mag;
}

double decode_int(code_t c, const int_format& f) {
    uint32_t raw = c & ((1u << f.bits) - 1);
    int64_t v = raw;
    if (raw >= (1u << (f.bits - 1))) v = static_cast<int64_t>(raw) - (int64_t{1} << f.bits);
    if (v < -f.qmax()) v = -f.qmax(); // the unused most-negative code
    return static_cast<double>(v);
}

} // namespace

int number_format::bits() const {
    return is_int() ? as_int().bits : as_fp().bits();
}

std::string number_format::name() const {
    if (is_int()) return "int" + std::to_string(as_int().bits);
    const auto& f = as_fp();
    std::string s = "fp" + std::to_string(f.bits()) + "_e" +
                    std::to_string(f.exp_bits) + "m" + std::to_string(f.man_bits);
    if (f.policy != default_policy(f.exp_bits, f.man_bits)) {
        switch (f.policy) {
            case special_policy::ieee:          s += "_ieee"; break;
            case special_policy::fn_single_nan: s += "_fn"; break;
            case special_policy::reallocated:   s += "_realloc"; break;
        }
    }
    return s;
}

number_format make_int(int bits) {
    if (bits < min_int_bits || bits > max_bits) {
        throw parse_error("int bit-width out of range [2,8]: " + std::to_string(bits));
    }
    return {.desc = int_format{bits}};
}

number_format make_fp(int exp_bits, int man_bits, special_policy policy) {
    int bits = 1 + exp_bits + man_bits;
    if (exp_bits < 1 || man_bits < 1 || bits > max_bits) {
        throw parse_error("fp format needs exp_bits >= 1, man_bits >= 1, total bits <= 8");
    }
    return {.desc = fp_format{exp_bits, man_bits, (1 << (exp_bits - 1)) - 1, policy}};
}

number_format make_fp(int exp_bits, int man_bits) {
    return make_fp(exp_bits, man_bits, default_policy(exp_bits, man_bits));
}

namespace {

bool parse_uint(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace

number_format parse_format(std::string_view name) {
    if (name.starts_with("int")) {
        int bits;
        if (!parse_uint(name.substr(3), bits)) {
            throw parse_error("bad integer format name: '" + std::string(name) + "'");
        }
        return make_int(bits);
    }
    if (!name.starts_with("fp")) {
        throw parse_error("unknown format name: '" + std::string(name) + "'");
    }

    std::string_view rest = name.substr(2);
    bool have_policy = false;
    special_policy policy{};
    for (auto [suffix, p] : {std::pair{std::string_view{"_ieee"}, special_policy::ieee},
                             {std::string_view{"_fn"}, special_policy::fn_single_nan},
                             {std::string_view{"_realloc"}, special_policy::reallocated}}) {
        if (rest.ends_with(suffix)) {
            have_policy = true;
            policy = p;
            rest.remove_suffix(suffix.size());
            break;
        }
    }

    auto us = rest.find('_');
    int bits, e, m;
    if (us == std::string_view::npos || !parse_uint(rest.substr(0, us), bits)) {
        throw parse_error("bad fp format name: '" + std::string(name) + "'");
    }
    std::string_view em = rest.substr(us + 1);
    auto mpos = em.find('m');
    if (em.empty() || em[0] != 'e' || mpos == std::string_view::npos ||
        !parse_uint(em.substr(1, mpos - 1), e) || !parse_uint(em.substr(mpos + 1), m)) {
        throw parse_error("bad fp format name: '" + std::string(name) + "'");
    }
    if (1 + e + m != bits) {
        throw parse_error("fp format '" + std::string(name) + "': 1+" +
                          std::to_string(e) + "+" + std::to_string(m) +
                          " != " + std::to_string(bits) + " bits");
    }
    number_format f = have_policy ? make_fp(e, m, policy) : make_fp(e, m);
    return f;
}

uint32_t code_count(const number_format& f) {
    return 1u << f.bits();
}

double decode(code_t c, const number_format& f) {
    return f.is_int() ? decode_int(c, f.as_int()) : decode_fp(c, f.as_fp());
}

code_t encode(double x, const number_format& f) {
    if (std::isnan(x)) throw value_error("encode: non-finite input");
    return f.is_int() ? encode_int(x, f.as_int()) : encode_fp(x, f.as_fp());
}

double max_finite(const number_format& nf) {
    if (nf.is_int()) return static_cast<double>(nf.as_int().qmax());
    const auto& f = nf.as_fp();
    uint32_t efield_top = (1u << f.exp_bits) - 1;
    switch (f.policy) {
        case special_policy::reallocated:
            return std::ldexp(static_cast<double>((2u << f.man_bits) - 1),
                              static_cast<int>(efield_top) - f.exp_bias - f.man_bits);
        case special_policy::fn_single_nan:
            return std::ldexp(static_cast<double>((2u << f.man_bits) - 2),
                              static_cast<int>(efield_top) - f.exp_bias - f.man_bits);
        case special_policy::ieee:
            if (efield_top - 1 == 0) { // exp_bits == 1: only subnormals are finite
                return std::ldexp(static_cast<double>((1u << f.man_bits) - 1),
                                  1 - f.exp_bias - f.man_bits);
            }
            return std::ldexp(static_cast<double>((2u << f.man_bits) - 1),
                              static_cast<int>(efield_top) - 1 - f.exp_bias - f.man_bits);
    }
    return 0;
}

std::vector<std::pair<code_t, double>> enumerate_values(const number_format& f) {
    std::vector<std::pair<code_t, double>> out;
    out.reserve(code_count(f));
    for (code_t c = 0; c < code_count(f); ++c) {
        out.emplace_back(c, decode(c, f));
    }
    return out;
}

} // namespace mofq
