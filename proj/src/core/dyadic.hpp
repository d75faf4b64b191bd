#pragma once
// Exact dyadic-rational scalar helpers. A value is an integer `num` at a
// scale exponent `sc`, meaning num * 2^-sc. All geometry below runs on these;
// floating point only appears at the final sqrt/report step.
#include <cstdint>
#include <cstdlib>
#include <string>

namespace caplab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

constexpr int kMaxScale = 62;

inline i64 pow2i(int k) { return k <= 0 ? 1 : (i64(1) << k); }

// floor(a / 2^k) for possibly negative a (arithmetic shift semantics).
inline i64 floor_shr(i64 a, int k) {
  if (k <= 0) return a;
  return a >> k;  // impl-defined pre-C++20; C++20 mandates arithmetic shift
}

// Compare a*2^-sa ? b*2^-sb exactly. Returns -1/0/+1.
inline int cmp_scaled(i64 a, int sa, i64 b, int sb) {
  const int s = sa > sb ? sa : sb;
  const i128 av = i128(a) << (s - sa);
  const i128 bv = i128(b) << (s - sb);
  return av < bv ? -1 : (av > bv ? 1 : 0);
}

// A dyadic rational num * 2^-scale, kept normalized (num odd or zero).
struct Dyadic {
  i64 num = 0;
  int scale = 0;
  void normalize() {
    if (num == 0) { scale = 0; return; }
    while (scale > 0 && (num & 1) == 0) { num >>= 1; --scale; }
  }
  double to_double() const { return double(num) / double(pow2i(scale)); }
};

// Parse "3", "1.5", "0.25", "-0.375" as an exact dyadic rational.
// Returns false for values (like 0.1) that are not dyadic.
inline bool parse_dyadic(const std::string& s, Dyadic* out) {
  if (s.empty()) return false;
  size_t pos = 0;
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') { neg = s[0] == '-'; pos = 1; }
  i64 ip = 0;
  bool any = false;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
    ip = ip * 10 + (s[pos] - '0');
    if (ip > (i64(1) << 40)) return false;
    ++pos; any = true;
  }
  i64 num = ip;
  int scale = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    // digits d1..dk: value += d/10^k; dyadic iff 5^k divides d after scaling.
    i64 frac = 0, den5 = 1;
    int k = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac = frac * 10 + (s[pos] - '0');
      den5 *= 5;
      ++k; ++pos; any = true;
      if (k > 18) return false;
    }
    if (k > 0) {
      if (frac % den5 != 0) return false;  // not a dyadic rational
      num = ip * pow2i(k) + frac / den5;   // value = num * 2^-k
      scale = k;
    }
  }
  if (pos != s.size() || !any) return false;
  out->num = neg ? -num : num;
  out->scale = scale;
  out->normalize();
  return true;
}

// Recover an exact dyadic from a double (must be representable with
// scale <= max_scale). Used for API parameters like s.
inline bool dyadic_from_double(double v, int max_scale, Dyadic* out) {
  for (int sc = 0; sc <= max_scale; ++sc) {
    const double scaled = v * double(pow2i(sc));
    const i64 n = i64(scaled >= 0 ? scaled + 0.5 : scaled - 0.5);
    if (double(n) == scaled) {
      out->num = n;
      out->scale = sc;
      out->normalize();
      return true;
    }
  }
  return false;
}

inline std::string dyadic_to_string(const Dyadic& d) {
  char buf[64];
  if (d.scale == 0) {
    std::snprintf(buf, sizeof buf, "%lld", (long long)d.num);
  } else {
    std::snprintf(buf, sizeof buf, "%lld/%lld", (long long)d.num,
                  (long long)pow2i(d.scale));
  }
  return buf;
}

}  // namespace caplab
