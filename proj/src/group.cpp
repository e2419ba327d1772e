#include "walkbounds/group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "group_model.hpp"
#include "walkbounds/error.hpp"

namespace walkbounds {

using detail::kInf;

std::size_t hash_code(CodeView code) noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ code.size();
  for (std::int32_t v : code) {
    std::uint64_t z = h + static_cast<std::uint32_t>(v) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h = z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Free: return "free";
    case GroupKind::Cyclic: return "cyclic";
    case GroupKind::FreeProduct: return "free_product";
    case GroupKind::FreeAbelian: return "free_abelian";
    case GroupKind::DirectProduct: return "direct_product";
  }
  return "?";
}

std::string to_string(ProductConvention convention) {
  return convention == ProductConvention::Union ? "union" : "synchronized";
}

GroupSpec GroupSpec::free(int rank, std::vector<std::string> labels) {
  GroupSpec s;
  s.kind = GroupKind::Free;
  s.rank = rank;
  s.labels = std::move(labels);
  return s;
}

GroupSpec GroupSpec::cyclic(long order, std::string label) {
  GroupSpec s;
  s.kind = GroupKind::Cyclic;
  s.order = order;
  if (!label.empty()) s.labels = {std::move(label)};
  return s;
}

GroupSpec GroupSpec::integers(std::string label) {
  return cyclic(0, std::move(label));
}

GroupSpec GroupSpec::free_product(std::vector<GroupSpec> factors) {
  GroupSpec s;
  s.kind = GroupKind::FreeProduct;
  s.factors = std::move(factors);
  return s;
}

GroupSpec GroupSpec::free_abelian(int rank, std::vector<std::string> labels) {
  GroupSpec s;
  s.kind = GroupKind::FreeAbelian;
  s.rank = rank;
  s.labels = std::move(labels);
  return s;
}

GroupSpec GroupSpec::direct_product(std::vector<GroupSpec> factors,
                                    ProductConvention convention) {
  GroupSpec s;
  s.kind = GroupKind::DirectProduct;
  s.factors = std::move(factors);
  s.convention = convention;
  return s;
}

namespace {

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  if (n <= 25) {
    for (char c = 'a'; out.size() < n; ++c) {
      if (c != 'e') out.emplace_back(1, c);
    }
  } else {
    for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  }
  return out;
}

bool valid_label(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string power_string(const std::string& label, long k) {
  return k == 1 ? label : label + "^" + std::to_string(k);
}

// Tokenizer shared by the word-based models: splits "a^2 B b^-3" into
// (label, exponent) pairs using greedy longest-label matching.
struct Token {
  std::size_t label_index;
  long exponent;
};

class WordLexer {
 public:
  explicit WordLexer(const std::vector<std::string>& labels) : labels_(labels) {}

  std::vector<Token> lex(std::string_view text) const {
    std::vector<Token> out;
    std::size_t i = 0;
    auto skip = [&] {
      while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') {
          ++i;
        } else if (text.compare(i, 2, "\xC2\xB7") == 0) {  // middle dot
          i += 2;
        } else {
          break;
        }
      }
    };
    skip();
    std::string trimmed(text.substr(i));
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
      trimmed.pop_back();
    }
    if (trimmed == "e" || trimmed == "1" || trimmed.empty()) {
      if (trimmed.empty() || !has_label(trimmed)) return out;
    }
    while (i < text.size()) {
      std::size_t best = labels_.size();
      std::size_t best_len = 0;
      bool inverted = false;
      for (std::size_t k = 0; k < labels_.size(); ++k) {
        const auto& lab = labels_[k];
        if (lab.size() > best_len && text.compare(i, lab.size(), lab) == 0) {
          best = k;
          best_len = lab.size();
          inverted = false;
        }
        if (lab.size() == 1 && best_len == 0 &&
            text[i] == std::toupper(static_cast<unsigned char>(lab[0]))) {
          best = k;
          best_len = 1;
          inverted = true;
        }
      }
      if (best == labels_.size()) {
        throw InvalidInput("unknown symbol at '" + std::string(text.substr(i)) +
                           "'");
      }
      i += best_len;
      long exponent = 1;
      if (i < text.size() && text[i] == '^') {
        ++i;
        std::size_t j = i;
        if (j < text.size() && (text[j] == '-' || text[j] == '+')) ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        std::string digits(text.substr(i, j - i));
        if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);
        long value = 0;
        auto [ptr, ec] =
            std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
          throw InvalidInput("bad exponent in '" + std::string(text) + "'");
        }
        exponent = value;
        i = j;
      }
      if (inverted) exponent = -exponent;
      if (exponent != 0) out.push_back({best, exponent});
      skip();
    }
    return out;
  }

 private:
  bool has_label(const std::string& s) const {
    return std::find(labels_.begin(), labels_.end(), s) != labels_.end();
  }
  const std::vector<std::string>& labels_;
};

// ---------------------------------------------------------------------------
// Free products of cyclic groups. Free groups are free products of copies of
// Z and a lone cyclic group is a one-factor product. Code: (factor, exponent)
// pairs, exponent in [1, m-1] for Z/m and nonzero for Z, adjacent factors
// distinct.

struct Factor {
  long order = 0;  // 0 = infinite
  std::string label;
  double weight = 1.0;
  bool full = false;  // generated by every element, identity included
};

class SyllableModel final : public detail::GroupModel {
 public:
  explicit SyllableModel(std::vector<Factor> factors)
      : factors_(std::move(factors)) {
    for (const auto& f : factors_) labels_.push_back(f.label);
    odd_cycle_ = kInf;
    tree_ = true;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const Factor& f = factors_[i];
      if (f.weight != 1.0) unit_weights_ = false;
      if (f.full) {
        odd_cycle_ = std::min(odd_cycle_, 1.0);
        tree_ = false;
      } else if (f.order > 2) {
        tree_ = false;
        if (f.order % 2 == 1) odd_cycle_ = std::min(odd_cycle_, double(f.order));
      }
      const auto fi = static_cast<std::int32_t>(i);
      if (f.full) {
        for (long k = 0; k < f.order; ++k) {
          Code c = k == 0 ? Code{} : Code{fi, static_cast<std::int32_t>(k)};
          gens_.push_back({k == 0 ? "e" : power_string(f.label, k),
                           Element(std::move(c)), f.weight});
        }
      } else if (f.order == 2) {
        gens_.push_back({f.label, Element(Code{fi, 1}), f.weight});
      } else {
        const std::int32_t inv = f.order == 0 ? -1 : static_cast<std::int32_t>(f.order - 1);
        gens_.push_back({f.label, Element(Code{fi, 1}), f.weight});
        gens_.push_back({format(Code{fi, inv}), Element(Code{fi, inv}), f.weight});
      }
    }
  }

  Code identity() const override { return {}; }

  void multiply(Code& x, CodeView g) const override {
    for (std::size_t i = 0; i + 1 < g.size(); i += 2) push(x, g[i], g[i + 1]);
  }

  Code inverse(CodeView x) const override {
    Code out;
    out.reserve(x.size());
    for (std::size_t i = x.size(); i >= 2; i -= 2) {
      const std::int32_t f = x[i - 2];
      out.push_back(f);
      out.push_back(normalize(f, -static_cast<long>(x[i - 1])));
    }
    return out;
  }

  double length(CodeView x) const override {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
      total += syllable_steps(x[i], x[i + 1]) * factors_[x[i]].weight;
    }
    return total;
  }

  void validate(CodeView x) const override {
    if (x.size() % 2 != 0) throw InvalidInput("malformed word code");
    for (std::size_t i = 0; i < x.size(); i += 2) {
      if (x[i] < 0 || static_cast<std::size_t>(x[i]) >= factors_.size()) {
        throw InvalidInput("word uses an unknown factor");
      }
      if (i >= 2 && x[i] == x[i - 2]) throw InvalidInput("word is not reduced");
      const Factor& f = factors_[x[i]];
      const long e = x[i + 1];
      if (e == 0 || (f.order != 0 && (e < 1 || e >= f.order))) {
        throw InvalidInput("syllable exponent is not canonical");
      }
    }
  }

  std::array<double, 2> parity_lengths(CodeView x) const override {
    std::array<double, 2> best{0.0, kInf};
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
      const auto syl = syllable_parity(x[i], x[i + 1]);
      std::array<double, 2> next{kInf, kInf};
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          next[p ^ q] = std::min(next[p ^ q], best[p] + syl[q]);
        }
      }
      best = next;
    }
    return {std::min(best[0], best[1] + odd_cycle_),
            std::min(best[1], best[0] + odd_cycle_)};
  }

  Code parse(std::string_view text) const override {
    Code x;
    for (const Token& t : WordLexer(labels_).lex(text)) {
      const auto fi = static_cast<std::int32_t>(t.label_index);
      const std::int32_t e = normalize(fi, t.exponent);
      if (e != 0) push(x, fi, e);
    }
    return x;
  }

  std::string format(CodeView x) const override {
    if (x.empty()) return "e";
    std::string out;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
      if (!out.empty()) out += ' ';
      out += power_string(factors_[x[i]].label, x[i + 1]);
    }
    return out;
  }

 private:
  std::int32_t normalize(std::int32_t f, long e) const {
    const long m = factors_[f].order;
    if (m == 0) return static_cast<std::int32_t>(e);
    return static_cast<std::int32_t>(((e % m) + m) % m);
  }

  void push(Code& x, std::int32_t f, std::int32_t e) const {
    if (!x.empty() && x[x.size() - 2] == f) {
      const std::int32_t merged = normalize(f, static_cast<long>(x.back()) + e);
      if (merged == 0) {
        x.resize(x.size() - 2);
      } else {
        x.back() = merged;
      }
    } else {
      x.push_back(f);
      x.push_back(e);
    }
  }

  double syllable_steps(std::int32_t f, std::int32_t e) const {
    const Factor& fac = factors_[f];
    if (fac.order == 0) return std::abs(static_cast<double>(e));
    if (fac.full) return 1.0;
    return static_cast<double>(std::min<long>(e, fac.order - e));
  }

  std::array<double, 2> syllable_parity(std::int32_t f, std::int32_t e) const {
    const Factor& fac = factors_[f];
    if (fac.order == 0) {
      const long a = std::abs(static_cast<long>(e));
      return a % 2 == 0 ? std::array<double, 2>{double(a), kInf}
                        : std::array<double, 2>{kInf, double(a)};
    }
    if (fac.full) return {2.0, 1.0};
    std::array<double, 2> out{kInf, kInf};
    for (long j = -2; j <= 2; ++j) {
      const long s = e + j * fac.order;
      const int p = static_cast<int>(std::abs(s) % 2);
      out[p] = std::min(out[p], static_cast<double>(std::abs(s)));
    }
    return out;
  }

  std::vector<Factor> factors_;
  std::vector<std::string> labels_;
  double odd_cycle_ = kInf;
};

// ---------------------------------------------------------------------------
// Z^k with the standard generators; code is the coordinate vector.

class AbelianModel final : public detail::GroupModel {
 public:
  explicit AbelianModel(std::vector<std::string> labels)
      : labels_(std::move(labels)) {
    const auto k = labels_.size();
    tree_ = k == 1;
    for (std::size_t i = 0; i < k; ++i) {
      Code plus(k, 0), minus(k, 0);
      plus[i] = 1;
      minus[i] = -1;
      gens_.push_back({labels_[i], Element(plus), 1.0});
      gens_.push_back({labels_[i] + "^-1", Element(minus), 1.0});
    }
  }

  Code identity() const override { return Code(labels_.size(), 0); }

  void multiply(Code& x, CodeView g) const override {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += g[i];
  }

  Code inverse(CodeView x) const override {
    Code out(x.begin(), x.end());
    for (auto& v : out) v = -v;
    return out;
  }

  double length(CodeView x) const override {
    double total = 0.0;
    for (auto v : x) total += std::abs(static_cast<double>(v));
    return total;
  }

  void validate(CodeView x) const override {
    if (x.size() != labels_.size()) {
      throw InvalidInput("vector has " + std::to_string(x.size()) +
                         " coordinates, expected " +
                         std::to_string(labels_.size()));
    }
  }

  std::array<double, 2> parity_lengths(CodeView x) const override {
    const double n = length(x);
    return static_cast<long>(n) % 2 == 0 ? std::array<double, 2>{n, kInf}
                                         : std::array<double, 2>{kInf, n};
  }

  Code parse(std::string_view text) const override {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
            s.end());
    if (!s.empty() && s.front() == '(') {
      if (s.back() != ')') throw InvalidInput("unbalanced vector '" + s + "'");
      Code out;
      std::stringstream ss(s.substr(1, s.size() - 2));
      std::string item;
      while (std::getline(ss, item, ',')) {
        long v = 0;
        auto [ptr, ec] = std::from_chars(item.data() + (item[0] == '+'),
                                         item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
          throw InvalidInput("bad coordinate '" + item + "'");
        }
        out.push_back(static_cast<std::int32_t>(v));
      }
      validate(out);
      return out;
    }
    Code out = identity();
    for (const Token& t : WordLexer(labels_).lex(text)) {
      out[t.label_index] += static_cast<std::int32_t>(t.exponent);
    }
    return out;
  }

  std::string format(CodeView x) const override {
    std::string out = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(x[i]);
    }
    return out + ")";
  }

 private:
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Direct products. Code: for each component, its code length then its code.

class ProductModel final : public detail::GroupModel {
 public:
  ProductModel(std::vector<Group> parts, ProductConvention convention)
      : parts_(std::move(parts)), convention_(convention) {
    tree_ = false;
    const Code id = identity();
    if (convention_ == ProductConvention::Union) {
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        for (const auto& g : parts_[i].generators()) {
          if (g.element == parts_[i].identity()) continue;
          std::vector<Code> comps;
          for (const auto& p : parts_) comps.push_back(p.identity().code());
          comps[i] = g.element.code();
          add_generator(join(comps));
        }
      }
    } else {
      std::vector<std::size_t> idx(parts_.size(), 0);
      while (true) {
        std::vector<Code> comps;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
          comps.push_back(parts_[i].generators()[idx[i]].element.code());
        }
        Code c = join(comps);
        if (c != id) add_generator(std::move(c));
        std::size_t i = 0;
        while (i < parts_.size() && ++idx[i] == parts_[i].generators().size()) {
          idx[i++] = 0;
        }
        if (i == parts_.size()) break;
      }
    }
  }

  Code identity() const override {
    std::vector<Code> comps;
    for (const auto& p : parts_) comps.push_back(p.identity().code());
    return join(comps);
  }

  void multiply(Code& x, CodeView g) const override {
    auto xs = split(x);
    const auto gs = split(g);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      parts_[i].model().multiply(xs[i], gs[i]);
    }
    x = join(xs);
  }

  Code inverse(CodeView x) const override {
    auto xs = split(x);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      xs[i] = parts_[i].model().inverse(xs[i]);
    }
    return join(xs);
  }

  double length(CodeView x) const override {
    const auto xs = split(x);
    if (convention_ == ProductConvention::Union) {
      double total = 0.0;
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        total += parts_[i].model().length(xs[i]);
      }
      return total;
    }
    const auto par = parity_lengths(x);
    return std::min(par[0], par[1]);
  }

  void validate(CodeView x) const override {
    const auto xs = split(x);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      parts_[i].model().validate(xs[i]);
    }
  }

  std::array<double, 2> parity_lengths(CodeView x) const override {
    const auto xs = split(x);
    if (convention_ == ProductConvention::Synchronized) {
      std::array<double, 2> out{0.0, 0.0};
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto p = parts_[i].model().parity_lengths(xs[i]);
        out[0] = std::max(out[0], p[0]);
        out[1] = std::max(out[1], p[1]);
      }
      return out;
    }
    std::array<double, 2> best{0.0, kInf};
    double odd = kInf;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const auto& m = parts_[i].model();
      const auto p = m.parity_lengths(xs[i]);
      odd = std::min(odd, m.parity_lengths(m.identity())[1]);
      std::array<double, 2> next{kInf, kInf};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          next[a ^ b] = std::min(next[a ^ b], best[a] + p[b]);
        }
      }
      best = next;
    }
    return {std::min(best[0], best[1] + odd), std::min(best[1], best[0] + odd)};
  }

  Code parse(std::string_view text) const override {
    std::string s(text);
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    if (first == std::string::npos) return identity();
    s = s.substr(first, last - first + 1);
    if (s == "e" || s == "1") return identity();
    if (s.front() != '(' || s.back() != ')') {
      throw InvalidInput("product element must look like '(x | y)': " + s);
    }
    std::vector<std::string> pieces{""};
    int depth = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      const char c = s[i];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == '|' && depth == 0) {
        pieces.emplace_back();
      } else {
        pieces.back() += c;
      }
    }
    if (pieces.size() != parts_.size()) {
      throw InvalidInput("product element has " + std::to_string(pieces.size()) +
                         " components, expected " + std::to_string(parts_.size()));
    }
    std::vector<Code> comps;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      comps.push_back(parts_[i].model().parse(pieces[i]));
    }
    return join(comps);
  }

  std::string format(CodeView x) const override {
    const auto xs = split(x);
    std::string out = "(";
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += " | ";
      out += parts_[i].model().format(xs[i]);
    }
    return out + ")";
  }

 private:
  void add_generator(Code c) {
    gens_.push_back({format(c), Element(std::move(c)), 1.0});
  }

  static Code join(const std::vector<Code>& comps) {
    Code out;
    for (const auto& c : comps) {
      out.push_back(static_cast<std::int32_t>(c.size()));
      out.insert(out.end(), c.begin(), c.end());
    }
    return out;
  }

  std::vector<Code> split(CodeView x) const {
    std::vector<Code> out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (pos >= x.size()) throw InvalidInput("truncated product code");
      const auto n = static_cast<std::size_t>(x[pos]);
      if (x[pos] < 0 || pos + 1 + n > x.size()) {
        throw InvalidInput("malformed product code");
      }
      out.emplace_back(x.begin() + pos + 1, x.begin() + pos + 1 + n);
      pos += 1 + n;
    }
    if (pos != x.size()) throw InvalidInput("trailing data in product code");
    return out;
  }

  std::vector<Group> parts_;
  ProductConvention convention_;
};

double checked_weight(const GroupSpec& spec, const std::string& label) {
  auto it = spec.weights.find(label);
  if (it == spec.weights.end()) return 1.0;
  const double w = it->second;
  if (!std::isfinite(w) || w <= 0.0) {
    throw InvalidInput("weight of '" + label + "' must be positive and finite");
  }
  return w;
}

void check_labels(const std::vector<std::string>& labels) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!valid_label(l)) throw InvalidInput("invalid generator label '" + l + "'");
    if (l == "e") throw InvalidInput("label 'e' is reserved for the identity");
    if (!seen.insert(l).second) throw InvalidInput("duplicate label '" + l + "'");
  }
}

void check_weight_keys(const GroupSpec& spec, const std::vector<std::string>& labels) {
  for (const auto& [label, w] : spec.weights) {
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
      throw InvalidInput("weight given for unknown generator '" + label + "'");
    }
    (void)w;
  }
}

Factor cyclic_factor(const GroupSpec& spec, const std::string& label,
                     double weight) {
  if (spec.order != 0 && spec.order < 2) {
    throw InvalidInput("cyclic order must be >= 2 or infinite");
  }
  if (spec.order > 1'000'000) throw InvalidInput("cyclic order too large");
  Factor f;
  f.order = spec.order;
  f.label = label;
  f.weight = weight;
  f.full = spec.full_generating_set;
  if (f.full && f.order == 0) {
    throw InvalidInput("full generating set requires a finite cyclic group");
  }
  return f;
}

std::shared_ptr<const detail::GroupModel> build_model(GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::Free: {
      if (spec.rank < 1) throw InvalidInput("free group rank must be >= 1");
      if (spec.labels.empty()) spec.labels = default_labels(spec.rank);
      if (spec.labels.size() != static_cast<std::size_t>(spec.rank)) {
        throw InvalidInput("free group needs one label per generator");
      }
      check_labels(spec.labels);
      check_weight_keys(spec, spec.labels);
      std::vector<Factor> fs;
      for (const auto& l : spec.labels) {
        fs.push_back({0, l, checked_weight(spec, l), false});
      }
      return std::make_shared<SyllableModel>(std::move(fs));
    }
    case GroupKind::Cyclic: {
      if (spec.labels.empty()) spec.labels = {"b"};
      if (spec.labels.size() != 1) throw InvalidInput("cyclic group takes one label");
      check_labels(spec.labels);
      if (!spec.weights.empty()) {
        throw InvalidInput(
            "weights are supported only for free groups and free products");
      }
      return std::make_shared<SyllableModel>(
          std::vector<Factor>{cyclic_factor(spec, spec.labels[0], 1.0)});
    }
    case GroupKind::FreeProduct: {
      if (spec.factors.size() < 2) {
        throw InvalidInput("free product needs at least two factors");
      }
      std::vector<std::string> labels;
      auto fallback = default_labels(spec.factors.size());
      for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        GroupSpec& f = spec.factors[i];
        if (f.kind != GroupKind::Cyclic) {
          throw InvalidInput("free product factors must be cyclic");
        }
        if (f.full_generating_set) {
          throw InvalidInput("free product factors use the standard generators");
        }
        if (f.labels.empty()) f.labels = {fallback[i]};
        labels.push_back(f.labels.at(0));
        for (const auto& [k, w] : f.weights) spec.weights.emplace(k, w);
        f.weights.clear();
      }
      check_labels(labels);
      check_weight_keys(spec, labels);
      std::vector<Factor> fs;
      for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        fs.push_back(cyclic_factor(spec.factors[i], labels[i],
                                   checked_weight(spec, labels[i])));
      }
      return std::make_shared<SyllableModel>(std::move(fs));
    }
    case GroupKind::FreeAbelian: {
      if (spec.rank < 1) throw InvalidInput("free abelian rank must be >= 1");
      if (spec.labels.empty()) spec.labels = default_labels(spec.rank);
      if (spec.labels.size() != static_cast<std::size_t>(spec.rank)) {
        throw InvalidInput("free abelian group needs one label per generator");
      }
      check_labels(spec.labels);
      if (!spec.weights.empty()) {
        throw InvalidInput(
            "weights are supported only for free groups and free products");
      }
      return std::make_shared<AbelianModel>(spec.labels);
    }
    case GroupKind::DirectProduct: {
      if (spec.factors.size() < 2) {
        throw InvalidInput("direct product needs at least two factors");
      }
      if (!spec.weights.empty()) {
        throw InvalidInput(
            "weights are supported only for free groups and free products");
      }
      std::vector<Group> parts;
      for (auto& f : spec.factors) {
        parts.emplace_back(f);
        if (!parts.back().has_unit_weights()) {
          throw InvalidInput("direct product components must have unit weights");
        }
        f = parts.back().spec();
      }
      return std::make_shared<ProductModel>(std::move(parts), spec.convention);
    }
  }
  throw InvalidInput("unknown group kind");
}

}  // namespace

Group::Group(const GroupSpec& spec) : spec_(spec) { model_ = build_model(spec_); }

Element Group::identity() const { return Element(model_->identity()); }

Element Group::compose(const Element& x, const Element& y) const {
  Element out = x;
  model_->multiply(out.mutable_code(), y.view());
  return out;
}

void Group::compose_inplace(Element& x, const Element& g) const {
  model_->multiply(x.mutable_code(), g.view());
}

Element Group::inverse(const Element& x) const {
  return Element(model_->inverse(x.view()));
}

double Group::length(const Element& x) const { return model_->length(x.view()); }

void Group::validate(const Element& x) const { model_->validate(x.view()); }

const std::vector<Generator>& Group::generators() const noexcept {
  return model_->generators();
}

bool Group::has_unit_weights() const noexcept { return model_->unit_weights(); }

bool Group::is_tree() const noexcept { return model_->tree(); }

Element Group::parse(std::string_view text) const {
  Element e(model_->parse(text));
  model_->validate(e.view());
  return e;
}

std::string Group::format(const Element& x) const {
  return model_->format(x.view());
}

std::array<double, 2> Group::parity_lengths(const Element& x) const {
  return model_->parity_lengths(x.view());
}

BallCensus ball_census(const Group& group, int radius, std::size_t max_elements) {
  if (radius < 0) throw InvalidInput("census radius must be >= 0");
  if (!group.has_unit_weights()) {
    throw InvalidInput("ball census requires unit generator weights");
  }
  BallCensus census;
  std::unordered_set<Element, ElementHash> seen;
  std::vector<Element> frontier{group.identity()};
  seen.insert(frontier.front());
  census.sphere_sizes.push_back(1);
  census.ball_sizes.push_back(1);
  for (int n = 1; n <= radius; ++n) {
    std::vector<Element> next;
    for (const Element& x : frontier) {
      for (const Generator& g : group.generators()) {
        Element y = group.compose(x, g.element);
        if (seen.contains(y)) continue;
        if (seen.size() >= max_elements) {
          census.truncated = true;
          census.radius = n - 1;
          return census;
        }
        seen.insert(y);
        next.push_back(std::move(y));
      }
    }
    census.sphere_sizes.push_back(next.size());
    census.ball_sizes.push_back(census.ball_sizes.back() + next.size());
    census.radius = n;
    frontier = std::move(next);
    if (frontier.empty()) {
      // Finite group exhausted; remaining spheres are empty.
      for (int m = n + 1; m <= radius; ++m) {
        census.sphere_sizes.push_back(0);
        census.ball_sizes.push_back(census.ball_sizes.back());
      }
      census.radius = radius;
      break;
    }
  }
  return census;
}

namespace {

double window_rate(const BallCensus& c, int n) {
  const int w = (n + 1) / 2;
  const auto top = c.sphere_sizes[n];
  const auto bottom = c.sphere_sizes[n - w];
  if (top == 0 || bottom == 0) return 0.0;
  return std::log(static_cast<double>(top) / static_cast<double>(bottom)) / w;
}

}  // namespace

GrowthEstimate growth_estimate(const BallCensus& census) {
  const int n = census.radius;
  if (n < 2 || static_cast<int>(census.sphere_sizes.size()) <= n) {
    throw InvalidInput("growth estimate needs a census of radius >= 2");
  }
  GrowthEstimate g;
  g.depth = n;
  g.v_cesaro = std::log(static_cast<double>(census.ball_sizes[n])) / n;
  g.v_ratio = window_rate(census, n);
  if (n >= 4) g.error = std::abs(g.v_ratio - window_rate(census, n - 2));
  // Polynomial growth makes the windowed rate decay like 1/n: compare the
  // full-depth rate with the half-depth one.
  const double early = window_rate(census, std::max(2, n / 2));
  g.subexponential = g.v_ratio < 1e-12 || (n >= 8 && g.v_ratio < 0.8 * early);
  if (g.subexponential && g.v_ratio < 1e-12) g.v_ratio = 0.0;
  return g;
}

}  // namespace walkbounds
