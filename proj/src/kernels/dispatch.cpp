#include "tangram/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tangram::kernels {
namespace {

const Backend* lookup(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return &scalar_backend();
  if (std::strcmp(name, "avx2") == 0) return avx2_backend();
  if (std::strcmp(name, "neon") == 0) return neon_backend();
  return nullptr;
}

const Backend* detect() {
  if (const char* env = std::getenv("TANGRAM_KERNELS")) {
    if (const Backend* b = lookup(env)) return b;
  }
  if (const Backend* b = avx2_backend()) return b;
  if (const Backend* b = neon_backend()) return b;
  return &scalar_backend();
}

const Backend*& current() {
  static const Backend* backend = detect();
  return backend;
}

}  // namespace

const Backend& active() { return *current(); }

void force_backend(const char* name) {
  if (name == nullptr) {
    current() = detect();
    return;
  }
  const Backend* b = lookup(name);
  if (b == nullptr) {
    throw std::invalid_argument("unknown or unavailable kernel backend: " +
                                std::string(name));
  }
  current() = b;
}

}  // namespace tangram::kernels
