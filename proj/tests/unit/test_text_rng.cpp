#include <set>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"
#include "autonode/text.hpp"
#include "doctest.h"

using namespace autonode;

TEST_CASE("fold lowercases ASCII only") {
  CHECK(text::fold("Compose EMAIL") == "compose email");
  CHECK(text::fold("\xc3\x89t\xc3\xa9") == "\xc3\x89t\xc3\xa9");
  CHECK(text::fold("") == "");
}

TEST_CASE("trim and split") {
  CHECK(text::trim("  CLICK :: Send \n") == "CLICK :: Send");
  CHECK(text::trim("   ") == "");
  CHECK(text::split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(text::split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("fnv1a matches published vectors") {
  CHECK(text::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text::fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(text::hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
  CHECK(text::hex64(1) == "0000000000000001");
}

TEST_CASE("derive_seed is deterministic and spreads nearby inputs") {
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base)
    for (std::uint64_t p = 0; p < 20; ++p) seen.insert(derive_seed(base, {p}));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("Rng streams repeat for a seed and respect bounds") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);

  Rng r(5);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto v = r.range(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
    hits += r.bernoulli(0.25) ? 1 : 0;
  }
  CHECK(hits > 2250);
  CHECK(hits < 2750);
  CHECK_FALSE(r.bernoulli(0.0));
  CHECK(r.bernoulli(1.0));
}

TEST_CASE("json_io dump is canonical") {
  const auto j = nlohmann::json::parse(R"({"b":1,"a":{"d":[1,2],"c":"x"}})");
  CHECK(json_io::dump(j) == "{\n  \"a\": {\n    \"c\": \"x\",\n    \"d\": [\n      1,\n      2\n    ]\n  },\n  \"b\": 1\n}\n");
}

TEST_CASE("json_io accessors name the missing key") {
  const auto j = nlohmann::json::parse(R"({"n":1.5,"i":3,"s":"x"})");
  CHECK(json_io::require_int(j, "i") == 3);
  CHECK(json_io::require_number(j, "n") == 1.5);
  CHECK(json_io::require_string(j, "s") == "x");
  CHECK_THROWS_AS(json_io::require(j, "missing"), SchemaError);
  CHECK_THROWS_AS(json_io::require_int(j, "s"), SchemaError);
  CHECK_THROWS_AS(json_io::require_string(j, "i"), SchemaError);
  try {
    json_io::require(j, "missing");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("reading a missing file is a schema error") {
  CHECK_THROWS_AS(json_io::read_file("/nonexistent/dir/file.json"), Error);
}
