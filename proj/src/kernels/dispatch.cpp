#include <atomic>
#include <cstdlib>
#include <string>

#include "platedpg/errors.hpp"
#include "platedpg/kernels.hpp"

namespace platedpg::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_choice() {
  if (const char* env = std::getenv("PLATEDPG_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &detail::scalar_table();
    if (want == "avx2" && supported(Isa::avx2)) return detail::avx2_table();
  }
  if (supported(Isa::avx2)) return detail::avx2_table();
  return &detail::scalar_table();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> ptr{initial_choice()};
  return ptr;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

const Table& table(Isa isa) {
  if (!supported(isa))
    throw ConfigurationError("kernel ISA '" + std::string(isa_name(isa)) + "' is not available on this machine");
  return isa == Isa::avx2 ? *detail::avx2_table() : detail::scalar_table();
}

const Table& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace platedpg::kernels
