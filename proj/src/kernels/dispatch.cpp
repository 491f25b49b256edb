#include "rtcsim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rtcsim::kernels {

#if !defined(RTCSIM_HAVE_AVX2)
namespace avx2 {
void
path_loss (const LogDistanceCurve &, std::span<const double>, std::span<double>)
{
  throw std::logic_error ("AVX2 kernels not built");
}
void
distance (std::span<const double>, std::span<const double>, std::span<const double>,
          std::span<const double>, std::span<double>)
{
  throw std::logic_error ("AVX2 kernels not built");
}
} // namespace avx2
#endif

namespace {

constexpr int kUnset = -1;
std::atomic<int> g_isa{kUnset};

Isa
detect ()
{
  Isa best = avx2_available () ? Isa::Avx2 : Isa::Scalar;
  if (const char *env = std::getenv ("RTCSIM_SIMD"))
    {
      const std::string v (env);
      if (v == "scalar")
        return Isa::Scalar;
      if (v == "avx2" && best == Isa::Avx2)
        return Isa::Avx2;
    }
  return best;
}

void
check_sizes (std::size_t a, std::size_t b)
{
  if (a != b)
    throw std::invalid_argument ("kernel input and output spans differ in length");
}

} // namespace

std::string_view
isa_name (Isa isa)
{
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool
avx2_available ()
{
#if defined(RTCSIM_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports ("avx2");
  return ok;
#else
  return false;
#endif
}

Isa
active_isa ()
{
  int v = g_isa.load (std::memory_order_relaxed);
  if (v == kUnset)
    {
      v = static_cast<int> (detect ());
      g_isa.store (v, std::memory_order_relaxed);
    }
  return static_cast<Isa> (v);
}

void
set_isa (std::optional<Isa> isa)
{
  if (!isa)
    {
      g_isa.store (kUnset);
      return;
    }
  if (*isa == Isa::Avx2 && !avx2_available ())
    throw std::runtime_error ("AVX2 requested but not available");
  g_isa.store (static_cast<int> (*isa));
}

void
path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out)
{
  check_sizes (d.size (), out.size ());
  if (active_isa () == Isa::Avx2)
    avx2::path_loss (curve, d, out);
  else
    scalar::path_loss (curve, d, out);
}

void
distance (std::span<const double> ax, std::span<const double> ay, std::span<const double> bx,
          std::span<const double> by, std::span<double> out)
{
  check_sizes (ax.size (), out.size ());
  check_sizes (ay.size (), out.size ());
  check_sizes (bx.size (), out.size ());
  check_sizes (by.size (), out.size ());
  if (active_isa () == Isa::Avx2)
    avx2::distance (ax, ay, bx, by, out);
  else
    scalar::distance (ax, ay, bx, by, out);
}

} // namespace rtcsim::kernels
