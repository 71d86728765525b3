#include <doctest.h>

#include "fraclap/config.hpp"
#include "fraclap/errors.hpp"

using namespace fl;

TEST_CASE("flat config parsing") {
    const auto c = FlatConfig::parse("# ball run\ns = 0.8\nn1 = 7   # override\nprefactor_mode = \"paper\"\n\n");
    CHECK(c.number("s") == doctest::Approx(0.8));
    CHECK(c.integer("n1") == 7);
    CHECK(c.string("prefactor_mode") == "paper");
    CHECK_FALSE(c.number("rho1").has_value());
    CHECK_NOTHROW(c.require_keys({"s", "n1", "prefactor_mode"}));
}

TEST_CASE("flat config errors") {
    auto line_of = [](const std::string& text) -> long {
        try {
            FlatConfig::parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("s = 0.5\n[table]\n") == 2);
    CHECK(line_of("s = 0.5\ns = 0.6\n") == 2);
    CHECK(line_of("\n\nlevels = [1, 2]\n") == 3);
    CHECK(line_of("name = \"open\n") == 1);
    CHECK(line_of("just text\n") == 1);

    const auto c = FlatConfig::parse("s = \"half\"\nn1 = 2.5\nrho3 = 1\n");
    CHECK_THROWS_AS(c.number("s"), ParseError);
    CHECK_THROWS_AS(c.integer("n1"), ParseError);
    CHECK_THROWS_AS(c.require_keys({"s", "n1"}), ParseError);
    CHECK_THROWS_AS(FlatConfig::load("no/such/config.toml"), IoError);
}
