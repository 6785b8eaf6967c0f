#include <atomic>
#include <cstdlib>
#include <string>

#include "phototopic/diagnostics.hpp"
#include "phototopic/kernels.hpp"

namespace phototopic::kernels {
namespace {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* find(std::string_view name) {
  for (const KernelTable* t : available()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable* initial_choice() {
  const auto all = available();
  const KernelTable* best = all.back();
  if (const char* env = std::getenv("PHOTOTOPIC_KERNELS"); env != nullptr && *env) {
    if (const KernelTable* t = find(env)) return t;
    warn(std::string("PHOTOTOPIC_KERNELS=") + env + " is unavailable; using " +
         best->name);
  }
  return best;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_choice()};
  return slot;
}

}  // namespace

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
  if (const KernelTable* t = avx2(); t != nullptr && cpu_supports_avx2()) out.push_back(t);
  if (const KernelTable* t = neon(); t != nullptr) out.push_back(t);
  return out;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = find(name);
  if (t == nullptr) return false;
  active_slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace phototopic::kernels
