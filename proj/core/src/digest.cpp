#include "metainv/digest.hpp"

#include <fmt/format.h>

namespace metainv {

std::string Fnv1a64::hex() const { return fmt::format("{:016x}", state_); }

std::string content_digest(std::string_view bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return "fnv1a64:" + h.hex();
}

}  // namespace metainv
