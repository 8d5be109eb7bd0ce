#include "finsler/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace finsler {

FinslerLagrangian LagrangianSpec::build(std::shared_ptr<const MetricModel> model) const {
  switch (kind) {
    case Kind::riemannian: return FinslerLagrangian::from_expression(std::move(model), Expr::symbol("A"));
    case Kind::profile: return build_ab_lagrangian(std::move(model), *profile);
    case Kind::free: return FinslerLagrangian::from_expression(std::move(model), *expression);
  }
  throw std::logic_error("unreachable");
}

std::string LagrangianSpec::type_name() const {
  switch (kind) {
    case Kind::riemannian: return "riemannian";
    case Kind::free: return "free";
    case Kind::profile: break;
  }
  switch (profile->kind()) {
    case ProfileKind::randers: return "randers";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::generalized_kropina: return "kropina";
    case ProfileKind::unit:
    case ProfileKind::expression: return "omega";
  }
  return "omega";
}

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry, std::less<>>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

class Reader {
 public:
  Reader(std::string_view text, std::string origin) : origin_(std::move(origin)) { scan(text); }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ModelError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ModelError(origin_ + ": " + msg); }

  const Section* section(std::string_view name) const {
    auto it = sections_.find(std::string(name));
    return it == sections_.end() ? nullptr : &it->second;
  }
  int section_line(std::string_view name) const {
    auto it = section_lines_.find(std::string(name));
    return it == section_lines_.end() ? 0 : it->second;
  }

  double number(const Entry& e) const {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(e.line, "expected a number, got '" + e.value + "'");
    return v;
  }

  long long integer(const Entry& e) const {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(e.line, "expected an integer, got '" + e.value + "'");
    return v;
  }

  bool boolean(const Entry& e) const {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    fail(e.line, "expected true or false, got '" + e.value + "'");
  }

  Expr expression(const Entry& e, const std::set<std::string>& allowed) const {
    Expr x;
    try {
      x = parse(e.value);
    } catch (const ParseError& err) {
      fail(e.line, err.what());
    }
    for (const auto& s : x.symbols())
      if (!allowed.count(s)) fail(e.line, "unknown symbol '" + s + "' in '" + e.value + "'");
    return x;
  }

  std::pair<double, double> interval(const Entry& e) const {
    const auto parts = split_list(e.value);
    if (parts.size() != 2) fail(e.line, "expected 'lo, hi'");
    const double lo = number(Entry{parts[0], e.line});
    const double hi = number(Entry{parts[1], e.line});
    if (!(lo <= hi)) fail(e.line, "interval has lo > hi");
    return {lo, hi};
  }

  void reject_unknown(std::string_view section_name, const std::set<std::string, std::less<>>& keys) const {
    const Section* s = section(section_name);
    if (!s) return;
    for (const auto& [k, e] : *s)
      if (!keys.count(k)) fail(e.line, "unknown key '" + k + "' in [" + std::string(section_name) + "]");
  }

 private:
  void scan(std::string_view text) {
    static const std::set<std::string> known{"model",  "parameters", "metric", "oneform",
                                             "lagrangian", "sampling", "checks", "tolerances"};
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      const auto comment = raw.find_first_of("#;");
      const std::string line = trim(raw.substr(0, comment));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "malformed section header");
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (!known.count(current)) fail(line_no, "unknown section [" + current + "]");
        if (sections_.count(current)) fail(line_no, "duplicate section [" + current + "]");
        sections_[current];
        section_lines_[current] = line_no;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
      if (current.empty()) fail(line_no, "key outside of any section");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (key.empty()) fail(line_no, "empty key");
      if (value.empty()) fail(line_no, "empty value for '" + key + "'");
      auto& sec = sections_[current];
      if (sec.count(key)) fail(line_no, "duplicate key '" + key + "' in [" + current + "]");
      sec.emplace(key, Entry{value, line_no});
    }
  }

  std::string origin_;
  std::map<std::string, Section, std::less<>> sections_;
  std::map<std::string, int, std::less<>> section_lines_;
};

std::set<std::string> base_symbols(const MetricModel& m) {
  std::set<std::string> s(m.coordinates().begin(), m.coordinates().end());
  for (const auto& [k, _] : m.parameters()) s.insert(k);
  return s;
}

// Index pairs (a, b) with a <= b and coordinates[a] + coordinates[b] == key.
std::vector<std::pair<int, int>> split_pair(const std::vector<std::string>& coords, std::string_view key) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < static_cast<int>(coords.size()); ++a) {
    const auto& ca = coords[a];
    if (key.substr(0, ca.size()) != ca) continue;
    const auto rest = key.substr(ca.size());
    for (int b = 0; b < static_cast<int>(coords.size()); ++b)
      if (rest == coords[b]) out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

ModelDefinition parse_model_file(std::string_view text, const std::string& origin) {
  Reader r(text, origin);
  ModelDefinition def;

  // [model]
  const Section* model = r.section("model");
  if (!model) r.fail("missing [model] section");
  r.reject_unknown("model", {"name", "coordinates", "dimension", "expect", "description"});
  auto find = [](const Section* s, std::string_view k) -> const Entry* {
    if (!s) return nullptr;
    auto it = s->find(k);
    return it == s->end() ? nullptr : &it->second;
  };
  const Entry* coords_entry = find(model, "coordinates");
  if (!coords_entry) r.fail(r.section_line("model"), "[model] needs 'coordinates'");
  const auto coords = split_list(coords_entry->value);
  if (coords.empty()) r.fail(coords_entry->line, "no coordinates given");
  for (const auto& c : coords) {
    if (!(std::isalpha(static_cast<unsigned char>(c[0])) || c[0] == '_') ||
        !std::all_of(c.begin(), c.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }))
      r.fail(coords_entry->line, "invalid coordinate name '" + c + "'");
    if (c == "A" || c == "B" || c == "s") r.fail(coords_entry->line, "coordinate name '" + c + "' is reserved");
  }
  if (const Entry* d = find(model, "dimension"))
    if (r.integer(*d) != static_cast<long long>(coords.size()))
      r.fail(d->line, "dimension does not match the number of coordinates");
  const Entry* name = find(model, "name");
  try {
    def.model = std::make_shared<MetricModel>(name ? name->value : std::string("model"), coords);
  } catch (const ModelError& e) {
    r.fail(coords_entry->line, e.what());
  }
  if (const Entry* e = find(model, "description")) def.description = e->value;
  if (const Entry* e = find(model, "expect")) {
    def.expected = parse_verdict(e->value);
    if (!def.expected || *def.expected == Verdict::inconclusive)
      r.fail(e->line, "expect must be 'berwald' or 'not-berwald'");
  }

  // [parameters]
  if (const Section* params = r.section("parameters")) {
    for (const auto& [k, e] : *params) {
      if (k == "A" || k == "B" || k == "s") r.fail(e.line, "parameter name '" + k + "' is reserved");
      try {
        def.model->set_parameter(k, r.number(e));
      } catch (const ModelError& err) {
        r.fail(e.line, err.what());
      }
    }
  }
  const auto symbols = base_symbols(*def.model);

  // [metric]
  const Section* metric = r.section("metric");
  if (!metric) r.fail("missing [metric] section");
  std::set<std::pair<int, int>> seen;
  for (const auto& [k, e] : *metric) {
    if (k.rfind("g_", 0) != 0) r.fail(e.line, "unknown key '" + k + "' in [metric]");
    const auto pairs = split_pair(coords, std::string_view(k).substr(2));
    if (pairs.empty()) r.fail(e.line, "unknown key '" + k + "' in [metric]: not a pair of coordinates");
    if (pairs.size() > 1) r.fail(e.line, "ambiguous metric key '" + k + "'");
    if (!seen.insert(pairs.front()).second) r.fail(e.line, "metric component '" + k + "' given twice");
    def.model->set_metric(pairs.front().first, pairs.front().second, r.expression(e, symbols));
  }

  // [oneform]
  if (const Section* oneform = r.section("oneform")) {
    std::vector<Expr> beta(coords.size(), Expr::number(0.0));
    for (const auto& [k, e] : *oneform) {
      const int idx = k.rfind("beta_", 0) == 0 ? def.model->coordinate_index(std::string_view(k).substr(5)) : -1;
      if (idx < 0) r.fail(e.line, "unknown key '" + k + "' in [oneform]");
      beta[idx] = r.expression(e, symbols);
    }
    def.model->set_oneform(std::move(beta));
  }

  // [lagrangian]
  const Section* lag = r.section("lagrangian");
  const Entry* type = find(lag, "type");
  const std::string type_name = type ? type->value : "riemannian";
  const int lag_line = type ? type->line : r.section_line("lagrangian");
  auto need_oneform = [&] {
    if (!def.model->has_oneform()) r.fail(lag_line, "Lagrangian type '" + type_name + "' needs a [oneform] section");
  };
  if (type_name == "riemannian") {
    r.reject_unknown("lagrangian", {"type"});
    def.lagrangian.kind = LagrangianSpec::Kind::riemannian;
  } else if (type_name == "randers" || type_name == "exponential") {
    r.reject_unknown("lagrangian", {"type"});
    need_oneform();
    def.lagrangian.kind = LagrangianSpec::Kind::profile;
    def.lagrangian.profile = type_name == "randers" ? profile_randers() : profile_exponential();
  } else if (type_name == "kropina") {
    r.reject_unknown("lagrangian", {"type", "n", "m", "c"});
    need_oneform();
    KropinaParams p;
    for (auto [key, dst] : {std::pair{"n", &p.n}, std::pair{"m", &p.m}, std::pair{"c", &p.c}}) {
      const Entry* e = find(lag, key);
      if (!e) r.fail(lag_line, std::string("kropina Lagrangian needs '") + key + "'");
      *dst = r.number(*e);
    }
    try {
      def.lagrangian.profile = profile_generalized_kropina(p);
    } catch (const std::invalid_argument& e) {
      r.fail(lag_line, e.what());
    }
    def.lagrangian.kind = LagrangianSpec::Kind::profile;
  } else if (type_name == "omega") {
    r.reject_unknown("lagrangian", {"type", "omega"});
    need_oneform();
    const Entry* e = find(lag, "omega");
    if (!e) r.fail(lag_line, "omega Lagrangian needs 'omega'");
    std::set<std::string> allowed{"s"};
    for (const auto& [k, _] : def.model->parameters()) allowed.insert(k);
    def.lagrangian.kind = LagrangianSpec::Kind::profile;
    def.lagrangian.profile = profile_expression("omega", r.expression(*e, allowed), def.model->parameters());
  } else if (type_name == "free") {
    r.reject_unknown("lagrangian", {"type", "L"});
    const Entry* e = find(lag, "L");
    if (!e) r.fail(lag_line, "free Lagrangian needs 'L'");
    auto allowed = symbols;
    allowed.insert("A");
    if (def.model->has_oneform()) allowed.insert("B");
    for (const auto& c : coords) allowed.insert(velocity_symbol(c));
    def.lagrangian.kind = LagrangianSpec::Kind::free;
    def.lagrangian.expression = r.expression(*e, allowed);
  } else {
    r.fail(lag_line, "unknown Lagrangian type '" + type_name + "'");
  }

  // [sampling]
  if (const Section* s = r.section("sampling")) {
    auto& cfg = def.sampling;
    std::optional<std::pair<double, double>> box;
    std::map<int, std::pair<double, double>> per_coordinate;
    for (const auto& [k, e] : *s) {
      if (k == "box") {
        box = r.interval(e);
      } else if (k.rfind("box_", 0) == 0) {
        const int idx = def.model->coordinate_index(std::string_view(k).substr(4));
        if (idx < 0) r.fail(e.line, "unknown key '" + k + "' in [sampling]");
        per_coordinate[idx] = r.interval(e);
      } else if (k == "shells") {
        cfg.shells.clear();
        for (const auto& piece : split_list(e.value)) {
          const double v = r.number(Entry{piece, e.line});
          if (!(v > 0.0)) r.fail(e.line, "shell radii must be positive");
          cfg.shells.push_back(v);
        }
        if (cfg.shells.empty()) r.fail(e.line, "no shell radii given");
      } else if (k == "base_points" || k == "fiber_samples") {
        const long long v = r.integer(e);
        if (v < 1 || v > 1'000'000) r.fail(e.line, k + " out of range");
        (k == "base_points" ? cfg.base_points : cfg.fiber_samples) = static_cast<int>(v);
      } else if (k == "seed") {
        const long long v = r.integer(e);
        if (v < 0) r.fail(e.line, "seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(v);
      } else if (k == "eps_A" || k == "eps_B" || k == "eps_det") {
        const double v = r.number(e);
        if (!(v >= 0.0)) r.fail(e.line, k + " must be non-negative");
        (k == "eps_A" ? cfg.thresholds.eps_A : k == "eps_B" ? cfg.thresholds.eps_B : cfg.thresholds.eps_det) = v;
      } else {
        r.fail(e.line, "unknown key '" + k + "' in [sampling]");
      }
    }
    const auto fallback = box.value_or(std::pair{-1.0, 1.0});
    if (per_coordinate.empty()) {
      cfg.box = {fallback};
    } else {
      cfg.box.assign(coords.size(), fallback);
      for (const auto& [i, iv] : per_coordinate) cfg.box[i] = iv;
    }
  }

  // [checks]
  if (const Section* c = r.section("checks")) {
    StructuredTParams T;
    int t_keys = 0;
    for (const auto& [k, e] : *c) {
      if (k == "identities") def.checks.identities = r.boolean(e);
      else if (k == "theorem1") def.checks.theorem1 = r.boolean(e);
      else if (k == "corollary2") def.checks.corollary2 = r.boolean(e);
      else if (k == "corollary3") def.checks.corollary3 = r.boolean(e);
      else if (k == "T_lambda" || k == "T_rho" || k == "T_sigma") {
        ++t_keys;
        (k == "T_lambda" ? T.lambda : k == "T_rho" ? T.rho : T.sigma) = r.expression(e, symbols);
      } else {
        r.fail(e.line, "unknown key '" + k + "' in [checks]");
      }
    }
    if (t_keys != 0 && t_keys != 3) r.fail(r.section_line("checks"), "give all of T_lambda, T_rho, T_sigma or none");
    if (t_keys == 3) {
      if (!def.model->has_oneform()) r.fail(r.section_line("checks"), "structured T needs a [oneform] section");
      def.checks.structured_T = T;
    }
  }
  if ((def.checks.corollary2 || def.checks.corollary3) && def.lagrangian.kind != LagrangianSpec::Kind::profile)
    r.fail(r.section_line("checks"), "corollary2 and corollary3 checks need an (alpha,beta) Lagrangian");
  if (def.checks.corollary3 && !(def.lagrangian.profile && def.lagrangian.profile->kropina()))
    r.fail(r.section_line("checks"), "corollary3 needs a kropina Lagrangian");

  // [tolerances]
  if (const Section* t = r.section("tolerances")) {
    auto& tol = def.tolerances;
    for (const auto& [k, e] : *t) {
      double* dst = k == "spread"       ? &tol.spread
                    : k == "identity"   ? &tol.identity
                    : k == "theorem1"   ? &tol.theorem1
                    : k == "corollary2" ? &tol.corollary2
                    : k == "corollary3" ? &tol.corollary3
                                        : nullptr;
      if (!dst) r.fail(e.line, "unknown key '" + k + "' in [tolerances]");
      *dst = r.number(e);
      if (!(*dst > 0.0)) r.fail(e.line, "tolerance must be positive");
    }
  }
  return def;
}

ModelDefinition load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_file(buf.str(), path.string());
}

std::string write_model_file(const ModelDefinition& def) {
  const auto& m = *def.model;
  const auto& coords = m.coordinates();
  std::ostringstream out;
  auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& it : items) {
      if (!s.empty()) s += ", ";
      s += fmt(it);
    }
    return s;
  };

  out << "[model]\n";
  out << "name = " << m.name() << "\n";
  out << "coordinates = " << join(coords, [](const std::string& c) { return c; }) << "\n";
  if (!def.description.empty()) out << "description = " << def.description << "\n";
  if (def.expected) out << "expect = " << to_string(*def.expected) << "\n";

  if (!m.parameters().empty()) {
    out << "\n[parameters]\n";
    for (const auto& [k, v] : m.parameters()) out << k << " = " << format_number(v) << "\n";
  }

  out << "\n[metric]\n";
  for (int a = 0; a < m.dimension(); ++a)
    for (int b = a; b < m.dimension(); ++b) {
      const Expr& e = m.metric(a, b);
      if (e.kind() == Expr::Kind::number && e.number_value() == 0.0) continue;
      out << "g_" << coords[a] << coords[b] << " = " << e.to_string() << "\n";
    }

  if (m.has_oneform()) {
    out << "\n[oneform]\n";
    for (int a = 0; a < m.dimension(); ++a) {
      const Expr& e = m.oneform()[a];
      if (e.kind() == Expr::Kind::number && e.number_value() == 0.0) continue;
      out << "beta_" << coords[a] << " = " << e.to_string() << "\n";
    }
  }

  out << "\n[lagrangian]\n";
  out << "type = " << def.lagrangian.type_name() << "\n";
  if (def.lagrangian.kind == LagrangianSpec::Kind::profile) {
    const auto& p = *def.lagrangian.profile;
    if (const auto& k = p.kropina()) {
      out << "n = " << format_number(k->n) << "\nm = " << format_number(k->m) << "\nc = " << format_number(k->c)
          << "\n";
    } else if (p.kind() == ProfileKind::expression || p.kind() == ProfileKind::unit) {
      out << "omega = " << p.expression().to_string() << "\n";
    }
  } else if (def.lagrangian.kind == LagrangianSpec::Kind::free) {
    out << "L = " << def.lagrangian.expression->to_string() << "\n";
  }

  const auto& s = def.sampling;
  auto interval = [](const std::pair<double, double>& iv) {
    return format_number(iv.first) + ", " + format_number(iv.second);
  };
  out << "\n[sampling]\n";
  if (s.box.size() == 1) {
    out << "box = " << interval(s.box.front()) << "\n";
  } else {
    for (std::size_t i = 0; i < s.box.size() && i < coords.size(); ++i)
      out << "box_" << coords[i] << " = " << interval(s.box[i]) << "\n";
  }
  out << "shells = " << join(s.shells, [](double v) { return format_number(v); }) << "\n";
  out << "base_points = " << s.base_points << "\n";
  out << "fiber_samples = " << s.fiber_samples << "\n";
  out << "seed = " << s.seed << "\n";
  out << "eps_A = " << format_number(s.thresholds.eps_A) << "\n";
  out << "eps_B = " << format_number(s.thresholds.eps_B) << "\n";
  out << "eps_det = " << format_number(s.thresholds.eps_det) << "\n";

  const auto& c = def.checks;
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "\n[checks]\n";
  out << "identities = " << flag(c.identities) << "\n";
  out << "theorem1 = " << flag(c.theorem1) << "\n";
  out << "corollary2 = " << flag(c.corollary2) << "\n";
  out << "corollary3 = " << flag(c.corollary3) << "\n";
  if (c.structured_T) {
    out << "T_lambda = " << c.structured_T->lambda.to_string() << "\n";
    out << "T_rho = " << c.structured_T->rho.to_string() << "\n";
    out << "T_sigma = " << c.structured_T->sigma.to_string() << "\n";
  }

  const auto& t = def.tolerances;
  out << "\n[tolerances]\n";
  out << "spread = " << format_number(t.spread) << "\n";
  out << "identity = " << format_number(t.identity) << "\n";
  out << "theorem1 = " << format_number(t.theorem1) << "\n";
  out << "corollary2 = " << format_number(t.corollary2) << "\n";
  out << "corollary3 = " << format_number(t.corollary3) << "\n";
  return out.str();
}

}  // namespace finsler
