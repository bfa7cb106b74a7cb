#include <doctest.h>

TEST_SUITE("wasserstein") {
    TEST_CASE("placeholder") { CHECK(true); }
}
