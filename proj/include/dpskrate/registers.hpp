#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpsk {

// Ordered list of named tensor factors. The matrix side length of any
// operator carrying a signature is the product of its dims, with the first
// label occupying the most significant index slot (Kronecker convention).
struct RegisterSignature {
  std::vector<std::string> labels;
  std::vector<int> dims;

  int dim() const {
    return std::accumulate(dims.begin(), dims.end(), 1,
                           [](int a, int b) { return a * b; });
  }

  int position(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const RegisterSignature&) const = default;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i) s += "*";
      s += labels[i] + "(" + std::to_string(dims[i]) + ")";
    }
    return s;
  }

  // Signature with the factor at `pos` removed.
  RegisterSignature dropped(int pos) const {
    RegisterSignature out = *this;
    out.labels.erase(out.labels.begin() + pos);
    out.dims.erase(out.dims.begin() + pos);
    return out;
  }

  // Concatenation, used by the tensor product.
  RegisterSignature joined(const RegisterSignature& other) const {
    RegisterSignature out = *this;
    out.labels.insert(out.labels.end(), other.labels.begin(), other.labels.end());
    out.dims.insert(out.dims.end(), other.dims.begin(), other.dims.end());
    for (std::size_t i = 0; i < out.labels.size(); ++i)
      for (std::size_t j = i + 1; j < out.labels.size(); ++j)
        if (out.labels[i] == out.labels[j])
          throw std::invalid_argument("RegisterSignature: duplicate label '" +
                                      out.labels[i] + "' after join");
    return out;
  }
};

inline RegisterSignature make_signature(std::vector<std::string> labels,
                                        std::vector<int> dims) {
  if (labels.size() != dims.size())
    throw std::invalid_argument("RegisterSignature: labels/dims length mismatch");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("RegisterSignature: nonpositive dim");
  RegisterSignature sig{std::move(labels), std::move(dims)};
  for (std::size_t i = 0; i < sig.labels.size(); ++i)
    for (std::size_t j = i + 1; j < sig.labels.size(); ++j)
      if (sig.labels[i] == sig.labels[j])
        throw std::invalid_argument("RegisterSignature: duplicate label '" +
                                    sig.labels[i] + "'");
  return sig;
}

}  // namespace dpsk
