#include <catch2/catch_amalgamated.hpp>

#include "miniscope/miniscope.hpp"

TEST_CASE("umbrella header compiles and basic types construct") {
  miniscope::ApiCatalog catalog = miniscope::ApiCatalog::builtin();
  REQUIRE(catalog.contains("wx.getLocation"));
  REQUIRE(miniscope::category_group("UserLocation") == "Location");
}
