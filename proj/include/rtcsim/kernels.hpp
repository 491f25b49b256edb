#pragma once

// Data-parallel inner loops of the channel model.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant picked at run time. The variants execute the same sequence of
// IEEE-754 operations (no FMA contraction, identical polynomial and
// constants), so their results are bit-identical; tests/test_kernels.cpp
// enforces that.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rtcsim::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name (Isa isa);

/// True when this build contains the AVX2 variant and the CPU can run it.
bool avx2_available ();

/// ISA used by the dispatching entry points. Defaults to the best available
/// one; the RTCSIM_SIMD environment variable (`scalar`, `avx2`, `auto`) is
/// honoured on first use.
Isa active_isa ();

/// Force an ISA (tests, benchmarking). Passing std::nullopt restores
/// automatic selection. Requesting AVX2 on a machine without it throws.
void set_isa (std::optional<Isa> isa);

/// Piecewise log-distance attenuation curve in the form the kernels consume:
///
///   loss(d) = ref_loss_db
///           + sum_k coef_db[k] * max(0, min(log10 d, log_bound[k+1]) - log_bound[k])
///
/// with log_bound[K] = +inf. coef_db[k] is 10 * exponent of segment k.
struct LogDistanceCurve
{
  double ref_loss_db = 0.0;
  std::vector<double> log_bound; ///< log10 of each segment's start distance
  std::vector<double> coef_db;   ///< same length as log_bound

  static LogDistanceCurve from_segments (double ref_loss_db,
                                         std::span<const double> boundaries_m,
                                         std::span<const double> exponents);
};

/// Natural-log free log10 shared by both ISAs (atanh series on the reduced
/// mantissa). Accurate to a few ulp for positive normal inputs.
double log10_ref (double x);

/// out[i] = loss(d[i]). Distances must be finite and non-negative.
void path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out);

/// out[i] = |(ax[i], ay[i]) - (bx[i], by[i])|.
void distance (std::span<const double> ax, std::span<const double> ay,
               std::span<const double> bx, std::span<const double> by,
               std::span<double> out);

namespace scalar {
void path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out);
void distance (std::span<const double> ax, std::span<const double> ay,
               std::span<const double> bx, std::span<const double> by,
               std::span<double> out);
} // namespace scalar

namespace avx2 {
void path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out);
void distance (std::span<const double> ax, std::span<const double> ay,
               std::span<const double> bx, std::span<const double> by,
               std::span<double> out);
} // namespace avx2

} // namespace rtcsim::kernels
