#include "dacdr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dacdr::kernels {

const Backend* avx2_backend_impl();  // defined in kernels_avx2.cpp

namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend* find(std::string_view name) {
  for (const Backend* b : available_backends()) {
    if (name == b->name) return b;
  }
  return nullptr;
}

std::atomic<const Backend*> g_active{nullptr};

const Backend* pick_default() {
  if (const char* env = std::getenv("DACDR_KERNELS")) {
    if (const Backend* b = find(env)) return b;
  }
  const auto& avail = available_backends();
  return avail.back();  // best available; scalar is always first
}

}  // namespace

const std::vector<const Backend*>& available_backends() {
  static const std::vector<const Backend*> list = [] {
    std::vector<const Backend*> v{&scalar_backend()};
    if (avx2_supported()) {
      if (const Backend* b = avx2_backend_impl()) v.push_back(b);
    }
    return v;
  }();
  return list;
}

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = pick_default();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

bool select(std::string_view name) {
  if (const Backend* b = find(name)) {
    g_active.store(b, std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace dacdr::kernels
