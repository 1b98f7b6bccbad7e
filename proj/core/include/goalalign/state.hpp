#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace goalalign {

using FluentId = std::uint32_t;

/// Set of fluent ids over a fixed universe [0, universe()).
///
/// Backed by a dense bitset. Equality, hashing and ordering are extensional:
/// two states compare equal iff they contain the same fluents and share a
/// universe size.
class State {
 public:
  State() = default;
  explicit State(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}
  State(std::size_t universe, std::initializer_list<FluentId> fluents) : State(universe) {
    for (FluentId f : fluents) insert(f);
  }
  template <typename Range>
  static State from(std::size_t universe, const Range& fluents) {
    State s(universe);
    for (auto f : fluents) s.insert(static_cast<FluentId>(f));
    return s;
  }

  std::size_t universe() const { return universe_; }

  bool contains(FluentId f) const {
    return f < universe_ && (words_[f >> 6] >> (f & 63)) & 1U;
  }
  void insert(FluentId f) {
    check(f);
    words_[f >> 6] |= std::uint64_t{1} << (f & 63);
  }
  void erase(FluentId f) {
    check(f);
    words_[f >> 6] &= ~(std::uint64_t{1} << (f & 63));
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool empty() const {
    for (auto w : words_) if (w) return false;
    return true;
  }

  /// this ⊆ other
  bool subset_of(const State& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t o = i < other.words_.size() ? other.words_[i] : 0;
      if (words_[i] & ~o) return false;
    }
    return true;
  }
  bool intersects(const State& other) const {
    std::size_t n = std::min(words_.size(), other.words_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }

  State& operator|=(const State& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  State& operator&=(const State& other) {
    for (std::size_t i = 0; i < words_.size(); ++i)
      words_[i] &= i < other.words_.size() ? other.words_[i] : 0;
    return *this;
  }
  /// Set difference (this \ other).
  State& operator-=(const State& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }
  friend State operator|(State a, const State& b) { return a |= b; }
  friend State operator&(State a, const State& b) { return a &= b; }
  friend State operator-(State a, const State& b) { return a -= b; }

  /// Ascending list of member ids.
  std::vector<FluentId> members() const {
    std::vector<FluentId> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        int bit = std::countr_zero(w);
        out.push_back(static_cast<FluentId>(i * 64 + static_cast<std::size_t>(bit)));
        w &= w - 1;
      }
    }
    return out;
  }

  /// Same members, different (not smaller than current members) universe.
  State resized(std::size_t universe) const {
    State s(universe);
    for (FluentId f : members()) if (f < universe) s.insert(f);
    return s;
  }

  friend bool operator==(const State& a, const State& b) = default;
  friend auto operator<=>(const State& a, const State& b) = default;

  std::size_t hash() const {
    std::size_t h = universe_ * 0x9e3779b97f4a7c15ULL;
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void check(FluentId f) const {
    if (f >= universe_) throw std::out_of_range("fluent id " + std::to_string(f) + " outside universe of " + std::to_string(universe_));
  }

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace goalalign

template <>
struct std::hash<goalalign::State> {
  std::size_t operator()(const goalalign::State& s) const noexcept { return s.hash(); }
};
