#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/errors.hpp"
#include "divlab/rng.hpp"

namespace divlab {

/// Fixed-length binary genome, packed 64 positions per word.
///
/// Position 0 is the first character of the string form and the least
/// significant bit of value(). Length is fixed at construction; all strings
/// participating in one experiment must share it.
class BitString {
public:
    explicit BitString(std::size_t n) : n_(n), words_(word_count(n), 0) {
        if (n == 0) throw UsageError("genome length must be positive");
    }

    /// Builds from an integer; bit i of `value` becomes position i. n <= 64.
    static BitString from_value(std::uint64_t value, std::size_t n) {
        if (n > 64) throw UsageError("from_value supports n <= 64");
        BitString x(n);
        x.words_[0] = n == 64 ? value : (value & ((1ULL << n) - 1));
        return x;
    }

    /// Parses "0"/"1" characters; s[0] is position 0.
    static BitString from_string(std::string_view s) {
        BitString x(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') {
                x.set(i, true);
            } else if (s[i] != '0') {
                throw UsageError("bit strings may contain only '0' and '1'");
            }
        }
        return x;
    }

    static BitString all_ones(std::size_t n) { return BitString(n).complement(); }

    static BitString random(std::size_t n, Rng& rng) {
        BitString x(n);
        for (auto& w : x.words_) w = rng.next();
        x.mask_tail();
        return x;
    }

    std::size_t size() const { return n_; }

    bool test(std::size_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1ULL;
    }

    void set(std::size_t i, bool bit) {
        check_index(i);
        const std::uint64_t mask = 1ULL << (i & 63);
        if (bit) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    void flip(std::size_t i) {
        check_index(i);
        words_[i >> 6] ^= 1ULL << (i & 63);
    }

    std::size_t count_ones() const {
        std::size_t c = 0;
        for (const auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    std::size_t count_zeros() const { return n_ - count_ones(); }

    BitString complement() const {
        BitString y(*this);
        for (auto& w : y.words_) w = ~w;
        y.mask_tail();
        return y;
    }

    BitString operator^(const BitString& other) const {
        check_same_length(other);
        BitString y(*this);
        for (std::size_t w = 0; w < words_.size(); ++w) y.words_[w] ^= other.words_[w];
        return y;
    }

    BitString operator&(const BitString& other) const {
        check_same_length(other);
        BitString y(*this);
        for (std::size_t w = 0; w < words_.size(); ++w) y.words_[w] &= other.words_[w];
        return y;
    }

    BitString operator|(const BitString& other) const {
        check_same_length(other);
        BitString y(*this);
        for (std::size_t w = 0; w < words_.size(); ++w) y.words_[w] |= other.words_[w];
        return y;
    }

    /// Integer whose bit i is position i. n <= 64 only; used by enumeration.
    std::uint64_t value() const {
        if (n_ > 64) throw UsageError("value() supports n <= 64");
        return words_[0];
    }

    std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) {
            if (test(i)) s[i] = '1';
        }
        return s;
    }

    /// Sorted positions holding a one (0-based).
    std::vector<std::size_t> one_positions() const {
        std::vector<std::size_t> pos;
        pos.reserve(count_ones());
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                pos.push_back((w << 6) + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
        return pos;
    }

    bool operator==(const BitString& other) const {
        return n_ == other.n_ && words_ == other.words_;
    }

    /// Numeric order (bit i weighted 2^i). Total order for map keys and
    /// deterministic witness selection.
    bool operator<(const BitString& other) const {
        if (n_ != other.n_) return n_ < other.n_;
        for (std::size_t w = words_.size(); w-- > 0;) {
            if (words_[w] != other.words_[w]) return words_[w] < other.words_[w];
        }
        return false;
    }

    friend std::size_t hamming(const BitString& x, const BitString& y) {
        x.check_same_length(y);
        std::size_t d = 0;
        for (std::size_t w = 0; w < x.words_.size(); ++w) {
            d += static_cast<std::size_t>(std::popcount(x.words_[w] ^ y.words_[w]));
        }
        return d;
    }

private:
    static std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

    void check_index(std::size_t i) const {
        if (i >= n_) throw UsageError("bit index out of range");
    }

    void check_same_length(const BitString& other) const {
        if (n_ != other.n_) throw UsageError("bit string length mismatch");
    }

    void mask_tail() {
        const std::size_t tail = n_ & 63;
        if (tail != 0) words_.back() &= (1ULL << tail) - 1;
    }

    std::size_t n_;
    std::vector<std::uint64_t> words_;
};

} // namespace divlab
