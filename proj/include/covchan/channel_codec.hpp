#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "covchan/error.hpp"
#include "covchan/params.hpp"
#include "covchan/timing_model.hpp"

namespace covchan {

using Bit = std::uint8_t;

/// Ordered bit sequence. Serialized as an ASCII string of '0'/'1'.
class BitMessage {
 public:
  BitMessage() = default;
  explicit BitMessage(std::vector<Bit> bits) : bits_(std::move(bits)) {
    for (Bit b : bits_)
      if (b > 1) throw ConfigError("bit values must be 0 or 1");
  }

  static BitMessage parse(std::string_view text) {
    std::vector<Bit> bits;
    bits.reserve(text.size());
    for (char ch : text) {
      if (ch != '0' && ch != '1') throw ConfigError(std::string("invalid bit character '") + ch + "'");
      bits.push_back(static_cast<Bit>(ch - '0'));
    }
    return BitMessage(std::move(bits));
  }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (Bit b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  const std::vector<Bit>& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  Bit operator[](std::size_t i) const { return bits_[i]; }
  std::size_t count_ones() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), Bit{1})); }

  friend bool operator==(const BitMessage&, const BitMessage&) = default;

 private:
  std::vector<Bit> bits_;
};

/// Number of positions where the messages differ; a length mismatch counts
/// every missing position as an error.
inline std::size_t bit_errors(const BitMessage& sent, const BitMessage& received) {
  const std::size_t common = std::min(sent.size(), received.size());
  std::size_t errors = std::max(sent.size(), received.size()) - common;
  for (std::size_t i = 0; i < common; ++i) errors += (sent[i] != received[i]);
  return errors;
}

/// `n_ones` ones and `n_zeros` zeros in a seeded Fisher-Yates order.
inline BitMessage arrange_message(std::size_t n_ones, std::size_t n_zeros, std::uint64_t seed) {
  std::vector<Bit> bits(n_ones, Bit{1});
  bits.resize(n_ones + n_zeros, Bit{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = bits.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(bits[i - 1], bits[j]);
  }
  return BitMessage(std::move(bits));
}

struct SenderAction {
  enum class Kind { read_full_sender_file, wait };
  Kind kind = Kind::wait;
  double wait = 0.0;  // seconds, for Kind::wait

  friend bool operator==(const SenderAction&, const SenderAction&) = default;
};

inline SenderAction modulate(Bit bit, double wait_period) {
  if (bit > 1) throw ConfigError("bit values must be 0 or 1");
  if (bit == 1) return {SenderAction::Kind::read_full_sender_file, 0.0};
  return {SenderAction::Kind::wait, wait_period};
}

// A 1-bit requires strictly more time than the threshold.
inline Bit demodulate(double measured, double threshold) { return measured > threshold ? Bit{1} : Bit{0}; }

inline Bit demodulate(Duration measured, Duration threshold) { return measured > threshold ? Bit{1} : Bit{0}; }

struct SlotRecord {
  std::size_t slot_index = 0;
  std::optional<Bit> sent_bit;
  Duration issued_at{0};
  Duration measured{0};
  Duration threshold{0};
  Bit decoded_bit = 0;
};

inline BitMessage encode_repetition3(const BitMessage& message) {
  std::vector<Bit> out;
  out.reserve(message.size() * 3);
  for (Bit b : message.bits()) out.insert(out.end(), 3, b);
  return BitMessage(std::move(out));
}

// 000 001 010 100 -> 0, 011 101 110 111 -> 1.
inline Bit majority3(Bit a, Bit b, Bit c) { return (a + b + c) >= 2 ? Bit{1} : Bit{0}; }

inline BitMessage decode_repetition3(const BitMessage& received) {
  if (received.size() % 3 != 0)
    throw FramingError("repetition-3 stream length " + std::to_string(received.size()) +
                       " is not a multiple of 3");
  std::vector<Bit> out;
  out.reserve(received.size() / 3);
  for (std::size_t i = 0; i < received.size(); i += 3)
    out.push_back(majority3(received[i], received[i + 1], received[i + 2]));
  return BitMessage(std::move(out));
}

enum class Coding { none, repetition3 };

inline std::string_view to_string(Coding c) { return c == Coding::none ? "none" : "repetition3"; }

inline BitMessage encode(const BitMessage& m, Coding c) { return c == Coding::none ? m : encode_repetition3(m); }
inline BitMessage decode(const BitMessage& m, Coding c) { return c == Coding::none ? m : decode_repetition3(m); }

}  // namespace covchan
