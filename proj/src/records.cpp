#include "qds/records.hpp"

#include <stdexcept>

namespace qds {

Message Message::from_string(const std::string& s) {
  Message m;
  m.bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("message must be a string of 0s and 1s: " + s);
    m.bits.push_back(c == '1' ? 1 : 0);
  }
  return m;
}

std::string Message::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace qds
