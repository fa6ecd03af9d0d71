#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "binyard/kernels.hpp"

namespace binyard::kernels {

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(BINYARD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const Table& table_for(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error("kernel ISA '" + to_string(isa) + "' not supported on this CPU/build");
#ifdef BINYARD_HAVE_AVX2
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("BINYARD_ISA")) {
    const std::string s = env;
    if (s == "scalar") return Isa::Scalar;
    if (s == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

struct Selection {
  std::atomic<Isa> isa{initial_isa()};
  std::atomic<const Table*> table{&table_for(isa.load())};
};

Selection& selection() {
  static Selection s;
  return s;
}

}  // namespace

const Table& active() { return *selection().table.load(std::memory_order_relaxed); }

Isa active_isa() { return selection().isa.load(); }

void set_active_isa(Isa isa) {
  const Table& t = table_for(isa);
  selection().isa.store(isa);
  selection().table.store(&t);
}

}  // namespace binyard::kernels
