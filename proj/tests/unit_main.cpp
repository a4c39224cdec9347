#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include "spike/spike.hpp"
TEST_CASE("smoke") { CHECK(true); }
