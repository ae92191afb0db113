#include "pcfbounds/groundsem.hpp"

#include <cctype>
#include <stdexcept>

namespace pcf {

SubDist::SubDist(std::map<std::uint64_t, Rational> entries, Rational err) : err_(canonical(std::move(err))) {
  if (err_ < 0) throw std::invalid_argument("negative err mass");
  Rational total = err_;
  for (auto& [n, p] : entries) {
    p.canonicalize();
    if (p < 0) throw std::invalid_argument("negative mass at " + std::to_string(n));
    if (p == 0) continue;
    total += p;
    entries_.emplace(n, std::move(p));
  }
  if (total > 1) throw std::invalid_argument("sub-distribution has total mass " + to_string(total) + " > 1");
}

SubDist SubDist::dirac(std::uint64_t n) { return SubDist({{n, Rational(1)}}, 0); }

SubDist SubDist::dirac_err() { return SubDist({}, 1); }

Rational SubDist::at(std::uint64_t n) const {
  auto it = entries_.find(n);
  return it == entries_.end() ? Rational(0) : it->second;
}

Rational SubDist::numeric_mass() const {
  Rational s = 0;
  for (const auto& [n, p] : entries_) s += p;
  return s;
}

IndexSet SubDist::support() const {
  IndexSet s;
  for (const auto& [n, p] : entries_) s.insert(n);
  return s;
}

bool pointwise_leq(const SubDist& u, const SubDist& v) {
  if (u.err() > v.err()) return false;
  for (const auto& [n, p] : u.entries()) {
    if (p > v.at(n)) return false;
  }
  return true;
}

bool ext_leq(const SubDist& u, const SubDist& v) {
  Rational inversions = 0;
  for (const auto& [n, p] : u.entries()) {
    Rational q = v.at(n);
    if (p > q) inversions += p - q;
  }
  return inversions <= v.err() - u.err();
}

SubDist combine(const std::vector<std::pair<Rational, SubDist>>& parts) {
  std::map<std::uint64_t, Rational> acc;
  Rational err = 0;
  for (const auto& [w, u] : parts) {
    if (w < 0) throw std::invalid_argument("negative weight in combine");
    if (w == 0) continue;
    for (const auto& [n, p] : u.entries()) acc[n] += w * p;
    err += w * u.err();
  }
  return SubDist(std::move(acc), std::move(err));
}

SubDist case_err(const SubDist& u, const SubDist& branch0, const SubDist& branch_s) {
  Rational zero_mass = u.at(0);
  Rational succ_mass = u.numeric_mass() - zero_mass;
  return combine({{zero_mass, branch0}, {succ_mass, branch_s}, {u.err(), SubDist::dirac_err()}});
}

SubDist let_err(const SubDist& u, const std::function<SubDist(std::uint64_t)>& h) {
  std::vector<std::pair<Rational, SubDist>> parts;
  parts.reserve(u.entries().size() + 1);
  for (const auto& [n, p] : u.entries()) parts.emplace_back(p, h(n));
  parts.emplace_back(u.err(), SubDist::dirac_err());
  return combine(parts);
}

SubDist bfun_err(const std::function<std::optional<std::uint64_t>(std::uint64_t)>& f, const SubDist& u) {
  std::map<std::uint64_t, Rational> out;
  for (const auto& [n, p] : u.entries()) {
    if (auto image = f(n)) out[*image] += p;
  }
  return SubDist(std::move(out), u.err());
}

SubDist succ_err(const SubDist& u) {
  return bfun_err([](std::uint64_t n) -> std::optional<std::uint64_t> { return n + 1; }, u);
}

SubDist pred_err(const SubDist& u) {
  return bfun_err([](std::uint64_t n) -> std::optional<std::uint64_t> { return n == 0 ? 0 : n - 1; }, u);
}

SubDist idl(const IndexSet& j, const SubDist& u) {
  std::map<std::uint64_t, Rational> kept;
  for (const auto& [n, p] : u.entries()) {
    if (j.count(n)) kept.emplace(n, p);
  }
  return SubDist(std::move(kept), u.err());
}

SubDist idu(const IndexSet& j, const SubDist& u) {
  std::map<std::uint64_t, Rational> kept;
  Rational err = u.err();
  for (const auto& [n, p] : u.entries()) {
    if (j.count(n)) {
      kept.emplace(n, p);
    } else {
      err += p;
    }
  }
  return SubDist(std::move(kept), std::move(err));
}

namespace {

class DistParser {
 public:
  explicit DistParser(std::string_view s) : s_(s) {}

  SubDist run() {
    skip_ws();
    expect('{');
    std::map<std::uint64_t, Rational> entries;
    Rational err = 0;
    bool seen_err = false;
    skip_ws();
    if (peek() != '}') {
      while (true) {
        skip_ws();
        std::string key = word();
        skip_ws();
        expect(':');
        skip_ws();
        std::string value = rational_text();
        Rational r;
        try {
          r = parse_rational(value);
        } catch (const RationalParseError& e) {
          throw SubDistParseError(e.what());
        }
        if (key == "err") {
          if (seen_err) throw SubDistParseError("duplicate key 'err'");
          seen_err = true;
          err = r;
        } else {
          std::uint64_t n = 0;
          try {
            std::size_t used = 0;
            n = std::stoull(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
          } catch (const std::exception&) {
            throw SubDistParseError("bad key '" + key + "' (expected a natural or 'err')");
          }
          if (!entries.emplace(n, r).second) throw SubDistParseError("duplicate key " + key);
        }
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    skip_ws();
    expect('}');
    skip_ws();
    if (pos_ != s_.size()) throw SubDistParseError("trailing characters after '}'");
    try {
      return SubDist(std::move(entries), std::move(err));
    } catch (const std::invalid_argument& e) {
      throw SubDistParseError(e.what());
    }
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) throw SubDistParseError(std::string("expected '") + c + "' at offset " + std::to_string(pos_));
    ++pos_;
  }
  std::string word() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw SubDistParseError("expected a key at offset " + std::to_string(pos_));
    return std::string(s_.substr(start, pos_ - start));
  }
  std::string rational_text() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}') ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

SubDist parse_subdist(std::string_view text) { return DistParser(text).run(); }

std::string format_subdist(const SubDist& u) {
  std::string out = "{";
  bool first = true;
  for (const auto& [n, p] : u.entries()) {
    if (!first) out += ", ";
    first = false;
    out += std::to_string(n) + ": " + to_string(p);
  }
  if (u.err() != 0) {
    if (!first) out += ", ";
    out += "err: " + to_string(u.err());
  }
  return out + "}";
}

}  // namespace pcf
