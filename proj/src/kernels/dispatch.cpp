#include <array>
#include <cstdlib>
#include <string>

#include "crr/kernels.hpp"

namespace crr::kernels {

namespace {

struct Registry {
  std::array<const KernelTable*, 3> tables{};
  std::size_t count = 0;
  const KernelTable* selected = nullptr;

  void add(const KernelTable& t) { tables[count++] = &t; }
};

Registry build_registry() {
  Registry r;
  r.add(scalar_table());
#if defined(CRR_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) r.add(avx2_table());
#endif
#if defined(CRR_HAVE_NEON)
  r.add(neon_table());
#endif
  r.selected = r.tables[r.count - 1];
  if (const char* forced = std::getenv("CRR_KERNELS"); forced != nullptr && *forced != '\0') {
    for (std::size_t i = 0; i < r.count; ++i) {
      if (r.tables[i]->name == std::string_view(forced)) r.selected = r.tables[i];
    }
  }
  return r;
}

const Registry& registry() {
  static const Registry r = build_registry();
  return r;
}

}  // namespace

std::span<const KernelTable* const> available() {
  const auto& r = registry();
  return {r.tables.data(), r.count};
}

const KernelTable& active() { return *registry().selected; }

const KernelTable* find(std::string_view name) {
  for (const auto* t : available()) {
    if (t->name == name) return t;
  }
  return nullptr;
}

}  // namespace crr::kernels
