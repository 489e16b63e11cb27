#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mofq {

/*
 * Software emulation of low-bit number formats.
 *
 * Minifloat layout (MSB first): 1 sign bit | exp_bits | man_bits.
 *   exponent field 0   -> subnormal: (m / 2^man_bits) * 2^(1 - bias)
 *   exponent field e>0 -> normal:    (1 + m / 2^man_bits) * 2^(e - bias)
 * The all-ones exponent field is interpreted per special_policy.
 *
 * Integer formats are signed and symmetric: values are exactly the
 * integers in [-(2^(bits-1) - 1), 2^(bits-1) - 1]. Codes are two's
 * complement; the most-negative code is unused and decodes clamped.
 *
 * Conversion rule is round-to-nearest with ties to the value whose
 * least-significant mantissa/integer bit is 0 (ties-to-even). Inputs
 * beyond the largest finite magnitude saturate, under every policy.
 */

// Interpretation of the all-ones exponent field.
enum class special_policy {
    ieee,          // Inf (mantissa 0) and NaN (mantissa != 0)
    reallocated,   // normal numbers; every code is finite
    fn_single_nan, // only the all-ones mantissa code is NaN; no Inf
};

struct fp_format {
    int exp_bits = 0;
    int man_bits = 0;
    int exp_bias = 0;
    special_policy policy = special_policy::ieee;

    int bits() const { return 1 + exp_bits + man_bits; }
    bool operator==(const fp_format&) const = default;
};

struct int_format {
    int bits = 0;

    int64_t qmax() const { return (int64_t{1} << (bits - 1)) - 1; }
    bool operator==(const int_format&) const = default;
};

struct number_format {
    std::variant<int_format, fp_format> desc;

    bool is_int() const { return std::holds_alternative<int_format>(desc); }
    bool is_fp() const { return std::holds_alternative<fp_format>(desc); }
    const int_format& as_int() const { return std::get<int_format>(desc); }
    const fp_format& as_fp() const { return std::get<fp_format>(desc); }

    int bits() const;
    // Canonical name; round-trips through parse_format().
    std::string name() const;

    bool operator==(const number_format&) const = default;
};

using code_t = uint32_t;

// bias = 2^(exp_bits-1) - 1. Policy defaults: e4m3 -> fn_single_nan,
// e5m2 -> ieee, other sub-8-bit formats -> reallocated, else ieee.
number_format make_int(int bits);
number_format make_fp(int exp_bits, int man_bits, special_policy policy);
number_format make_fp(int exp_bits, int man_bits);

// Accepted names: "int<bits>" and "fp<bits>_e<E>m<M>[_ieee|_fn|_realloc]"
// with 1+E+M == bits and 3 <= bits <= 8 (integers: 2 <= bits <= 8).
// Throws parse_error naming the offending token.
number_format parse_format(std::string_view name);

uint32_t code_count(const number_format& f); // 2^bits

// Total over all codes < code_count. Returns the exact value; NaN/Inf
// doubles stand in for special codes under the ieee/fn policies. Signed
// zero is decoded faithfully (code with sign bit set yields -0.0).
double decode(code_t c, const number_format& f);

// Round-to-nearest-even onto the format's finite value set. NaN input
// throws value_error; +-Inf and out-of-range magnitudes saturate.
// Zero results always encode as +0.
code_t encode(double x, const number_format& f);

// Largest finite representable magnitude.
double max_finite(const number_format& f);

// All 2^bits codes in code order with their decoded meaning.
std::vector<std::pair<code_t, double>> enumerate_values(const number_format& f);

} // namespace mofq
