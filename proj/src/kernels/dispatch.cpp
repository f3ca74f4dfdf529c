#include <cstdlib>
#include <string>

#include "qslab/error.hpp"
#include "qslab/kernels.hpp"

namespace qslab::kernels {
namespace {

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(QSLAB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(QSLAB_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const Table& select() {
  if (const char* env = std::getenv("QSLAB_ISA"); env && *env) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == name(isa)) return table(isa);
    }
    throw ParameterError("QSLAB_ISA: unknown kernel set '" + want + "'");
  }
  const auto isas = available();
  return table(isas.back());
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (supported(isa)) out.push_back(isa);
  }
  return out;
}

const Table& table(Isa isa) {
  if (!supported(isa)) {
    throw ParameterError("kernel set '" + std::string(name(isa)) + "' not available on this CPU/build");
  }
  switch (isa) {
#if defined(QSLAB_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table();
#endif
#if defined(QSLAB_HAVE_NEON)
    case Isa::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

const Table& active() {
  static const Table& t = select();
  return t;
}

}  // namespace qslab::kernels
