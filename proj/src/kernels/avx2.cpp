// Compiled with -mavx2 only. FMA stays disabled so every lane rounds exactly
// like the scalar reference.

#include "rtcsim/kernels.hpp"

#include <immintrin.h>

#include <limits>

#include "log_poly.hpp"

namespace rtcsim::kernels::avx2 {

using namespace detail;

namespace {

inline __m256d
log10_pd (__m256d x)
{
  const __m256i bits = _mm256_castpd_si256 (x);
  const __m256i ebits = _mm256_and_si256 (_mm256_srli_epi64 (bits, 52), _mm256_set1_epi64x (0x7FF));
  __m256d e = _mm256_sub_pd (
      _mm256_castsi256_pd (_mm256_or_si256 (ebits, _mm256_set1_epi64x (static_cast<long long> (kTwo52Bits)))),
      _mm256_set1_pd (kTwo52));
  e = _mm256_sub_pd (e, _mm256_set1_pd (1023.0));

  __m256d m = _mm256_castsi256_pd (
      _mm256_or_si256 (_mm256_and_si256 (bits, _mm256_set1_epi64x (static_cast<long long> (kMantissaMask))),
                       _mm256_set1_epi64x (static_cast<long long> (kExponentOne))));
  const __m256d big = _mm256_cmp_pd (m, _mm256_set1_pd (kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd (m, _mm256_mul_pd (m, _mm256_set1_pd (0.5)), big);
  e = _mm256_blendv_pd (e, _mm256_add_pd (e, _mm256_set1_pd (1.0)), big);

  const __m256d one = _mm256_set1_pd (1.0);
  const __m256d s = _mm256_div_pd (_mm256_sub_pd (m, one), _mm256_add_pd (m, one));
  const __m256d z = _mm256_mul_pd (s, s);
  __m256d p = _mm256_set1_pd (kCoef[kTerms - 1]);
  for (int k = kTerms - 2; k >= 0; --k)
    p = _mm256_add_pd (_mm256_mul_pd (p, z), _mm256_set1_pd (kCoef[k]));
  const __m256d ln_m = _mm256_mul_pd (_mm256_add_pd (s, s), p);
  const __m256d ln_x = _mm256_add_pd (_mm256_mul_pd (e, _mm256_set1_pd (kLn2)), ln_m);
  return _mm256_mul_pd (ln_x, _mm256_set1_pd (kInvLn10));
}

} // namespace

void
path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out)
{
  const std::size_t n = d.size ();
  const std::size_t segments = curve.log_bound.size ();
  const __m256d zero = _mm256_setzero_pd ();
  const __m256d inf = _mm256_set1_pd (std::numeric_limits<double>::infinity ());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    {
      const __m256d ld = log10_pd (_mm256_loadu_pd (d.data () + i));
      __m256d acc = _mm256_set1_pd (curve.ref_loss_db);
      for (std::size_t k = 0; k < segments; ++k)
        {
          const __m256d hi = k + 1 < segments ? _mm256_set1_pd (curve.log_bound[k + 1]) : inf;
          __m256d t = _mm256_sub_pd (_mm256_min_pd (ld, hi), _mm256_set1_pd (curve.log_bound[k]));
          t = _mm256_max_pd (t, zero);
          acc = _mm256_add_pd (acc, _mm256_mul_pd (_mm256_set1_pd (curve.coef_db[k]), t));
        }
      _mm256_storeu_pd (out.data () + i, acc);
    }
  if (i < n)
    scalar::path_loss (curve, d.subspan (i), out.subspan (i));
}

void
distance (std::span<const double> ax, std::span<const double> ay, std::span<const double> bx,
          std::span<const double> by, std::span<double> out)
{
  const std::size_t n = out.size ();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    {
      const __m256d dx = _mm256_sub_pd (_mm256_loadu_pd (ax.data () + i), _mm256_loadu_pd (bx.data () + i));
      const __m256d dy = _mm256_sub_pd (_mm256_loadu_pd (ay.data () + i), _mm256_loadu_pd (by.data () + i));
      const __m256d sq = _mm256_add_pd (_mm256_mul_pd (dx, dx), _mm256_mul_pd (dy, dy));
      _mm256_storeu_pd (out.data () + i, _mm256_sqrt_pd (sq));
    }
  if (i < n)
    scalar::distance (ax.subspan (i), ay.subspan (i), bx.subspan (i), by.subspan (i), out.subspan (i));
}

} // namespace rtcsim::kernels::avx2
