#include <doctest.h>

#include <fstream>
#include <sstream>

#include "finsler/fixtures.hpp"
#include "support.hpp"

using namespace finsler;

namespace {

const char* const kMinimal = R"(# a Randers metric on a curved plane
[model]
name = plane
coordinates = x, y
expect = not-berwald

[parameters]
k = 0.5

[metric]
g_xx = 1
g_yy = 1 + k*x^2  ; trailing comment

[oneform]
beta_y = x

[lagrangian]
type = randers

[sampling]
box_x = 0.5, 1.5
box_y = -1, 1
base_points = 9
seed = 4

[tolerances]
spread = 1e-6
)";

// Line number reported in a ModelError, or -1.
int error_line(const std::string& text) {
  try {
    parse_model_file(text, "t.ini");
  } catch (const ModelError& e) {
    const std::string what = e.what();
    const auto a = what.find(':'), b = what.find(':', a + 1);
    if (what.rfind("t.ini:", 0) != 0 || b == std::string::npos) return -1;
    return std::stoi(what.substr(a + 1, b - a - 1));
  }
  return -1;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parsing a model file") {
  const ModelDefinition d = parse_model_file(kMinimal);
  CHECK(d.model->name() == "plane");
  CHECK(d.model->dimension() == 2);
  CHECK(d.expected == Verdict::not_berwald);
  CHECK(d.lagrangian.kind == LagrangianSpec::Kind::profile);
  CHECK(d.lagrangian.type_name() == "randers");
  CHECK(d.sampling.base_points == 9);
  CHECK(d.sampling.seed == 4);
  REQUIRE(d.sampling.box.size() == 2);
  CHECK(d.sampling.box[0] == std::pair{0.5, 1.5});
  CHECK(d.tolerances.spread == 1e-6);
  CHECK(d.tolerances.identity == 1e-9);
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(metric_at(*d.model, x).g(1, 1) == doctest::Approx(1.5));
  CHECK(oneform_at(*d.model, x)[1] == 1.0);

  const auto L = d.lagrangian.build(d.model);
  Vector v(2);
  v << 0.0, 1.0;
  CHECK(L({x, v}) == doctest::Approx(std::pow(std::sqrt(1.5) + 1.0, 2)));
}

TEST_CASE("errors carry the offending line") {
  const std::string ok = kMinimal;
  CHECK(error_line(ok) == -1);
  CHECK(error_line(replace(ok, "seed = 4", "sead = 4")) == 24);
  CHECK(error_line(replace(ok, "[tolerances]", "[tolerance]")) == 26);
  CHECK(error_line(replace(ok, "seed = 4", "seed = 4\nseed = 5")) == 25);
  CHECK(error_line(replace(ok, "g_xx = 1", "g_xx = 1 +")) == 11);
  CHECK(error_line(replace(ok, "g_xx = 1", "g_xx = 1 + z")) == 11);
  CHECK(error_line(replace(ok, "g_xx = 1", "g_xz = 1")) == 11);
  CHECK(error_line(replace(ok, "coordinates = x, y", "coordinates = x, y\ndimension = 3")) == 5);
  CHECK(error_line(replace(ok, "box_x = 0.5, 1.5", "box_x = 1.5, 0.5")) == 21);
  CHECK(error_line(replace(ok, "base_points = 9", "base_points = nine")) == 23);
  CHECK(error_line(replace(ok, "type = randers", "type = cubic")) == 18);
  CHECK(error_line(replace(ok, "expect = not-berwald", "expect = maybe")) == 5);
  CHECK(error_line(replace(ok, "name = plane", "name plane")) == 3);
  CHECK_THROWS_AS(parse_model_file(replace(ok, "[oneform]\nbeta_y = x\n", "")), ModelError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.ini"), ModelError);
}

TEST_CASE("Lagrangian sections") {
  const std::string base = replace(kMinimal, "type = randers", "type = kropina\nn = 2\nm = 1\nc = 1");
  const auto k = parse_model_file(base);
  REQUIRE(k.lagrangian.profile.has_value());
  CHECK(k.lagrangian.profile->kropina()->n == 2.0);
  CHECK_THROWS_AS(parse_model_file(replace(base, "m = 1\n", "")), ModelError);

  const auto o = parse_model_file(replace(kMinimal, "type = randers", "type = omega\nomega = exp(-k*s)"));
  CHECK(o.lagrangian.profile->value(2.0) == doctest::Approx(std::exp(-1.0)));

  const auto f = parse_model_file(replace(kMinimal, "type = randers", "type = free\nL = A + B^2"));
  CHECK(f.lagrangian.kind == LagrangianSpec::Kind::free);
  CHECK_THROWS_AS(parse_model_file(replace(kMinimal, "type = randers", "type = free\nL = A + w")), ModelError);
}

TEST_CASE("every fixture survives a write/parse round trip") {
  testing::Gen g(2);
  for (const auto& f : canned_fixtures()) {
    INFO(f.name);
    const std::string text = write_model_file(f.definition);
    const ModelDefinition back = parse_model_file(text, f.name);
    CHECK(write_model_file(back) == text);
    CHECK(back.expected == f.expected());
    CHECK(back.sampling.thresholds.eps_det == f.definition.sampling.thresholds.eps_det);
    const auto L0 = f.definition.lagrangian.build(f.definition.model);
    const auto L1 = back.lagrangian.build(back.model);
    for (const auto& p : testing::admissible_points(L0, f.definition.sampling, 2, 2))
      CHECK(L1(p) == doctest::Approx(L0(p)).epsilon(1e-14));
  }
}

TEST_CASE("the shipped model files match the built-in fixtures") {
  for (const auto& f : canned_fixtures()) {
    INFO(f.name);
    const std::string path = std::string(FINSLER_SOURCE_DIR) + "/models/" + f.name + ".ini";
    const std::string text = read_file(path);
    REQUIRE_FALSE(text.empty());
    // a comment header, then exactly what the writer produces
    const auto body = text.find("\n[");
    REQUIRE(body != std::string::npos);
    CHECK(text.substr(body + 1) == write_model_file(f.definition));
    CHECK(write_model_file(load_model_file(path)) == write_model_file(f.definition));
  }
}
