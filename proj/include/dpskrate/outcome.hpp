#pragma once

#include <array>
#include <string_view>

namespace dpsk {

// Public announcement alphabet. Key rounds that clicked announce bot; test
// rounds announce whether the click was on the correct detector, the wrong
// one, or absent. No-click key rounds also announce nc.
enum class Outcome { bot = 0, cc = 1, wc = 2, nc = 3 };

inline constexpr std::array<Outcome, 4> kOutcomes = {Outcome::bot, Outcome::cc,
                                                     Outcome::wc, Outcome::nc};

constexpr std::string_view outcome_name(Outcome c) {
  switch (c) {
    case Outcome::bot: return "bot";
    case Outcome::cc: return "cc";
    case Outcome::wc: return "wc";
    case Outcome::nc: return "nc";
  }
  return "?";
}

}  // namespace dpsk
