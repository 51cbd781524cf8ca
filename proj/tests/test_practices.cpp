// Tests for privacy practice extraction and reachability classification.
//
// Fixture expectations were derived by hand from the idcheck app: the camera
// call lives in a subpackage utility module and only becomes visible (and
// reachable) after the subpackage is merged; the promo page is declared but
// never routed to; getMyLocation is defined but never bound or called.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "miniscope/api_catalog.hpp"
#include "miniscope/mdg.hpp"
#include "miniscope/package.hpp"
#include "miniscope/practices.hpp"

#include "support/temp_dir.hpp"

using namespace miniscope;

namespace {

Mdg fixture_mdg(bool merged) {
  const std::string root = std::string(MINISCOPE_FIXTURE_DIR) + "/idcheck";
  MiniAppPackage pkg = load_package(root);
  if (merged) {
    for (const SubpackageSpec& sp : pkg.subpackages)
      pkg = merge_subpackage(pkg, sp.root_prefix, root + "/" + sp.root_prefix);
  }
  return build_mdg(pkg);
}

Mdg build(const std::map<std::string, std::string>& files) {
  testsupport::TempDir dir;
  testsupport::write_tree(dir.path(), files);
  return build_mdg(load_package(dir.path()));
}

const PrivacyPractice* by_api(const std::vector<PrivacyPractice>& ps, const std::string& api) {
  for (const PrivacyPractice& p : ps)
    if (p.site.api == api) return &p;
  return nullptr;
}

}  // namespace

TEST_CASE("cataloged call sites are found with file, node and owning page") {
  Mdg m = fixture_mdg(true);
  std::vector<PracticeSite> sites = find_practice_sites(m, ApiCatalog::builtin());
  REQUIRE(sites.size() == 3);

  CHECK(std::is_sorted(sites.begin(), sites.end()));

  const PracticeSite* addr = nullptr;
  const PracticeSite* cam = nullptr;
  const PracticeSite* loc = nullptr;
  for (const PracticeSite& s : sites) {
    if (s.api == "wx.chooseAddress") addr = &s;
    if (s.api == "wx.createCameraContext") cam = &s;
    if (s.api == "wx.getLocation") loc = &s;
  }
  REQUIRE(addr);
  REQUIRE(cam);
  REQUIRE(loc);

  CHECK(addr->category == "Address");
  CHECK(addr->file == "checkID/pages/promo/promo.js");
  CHECK(addr->page == "checkID/pages/promo/promo");

  CHECK(cam->category == "Camera");
  CHECK(cam->file == "checkID/util/util.js");
  CHECK(cam->call_node == 12);
  // Utility modules have no owning page.
  CHECK(cam->page.empty());

  CHECK(loc->category == "UserLocation");
  CHECK(loc->file == "checkID/pages/verify/verify.js");
  CHECK(loc->call_node == 48);
  CHECK(loc->page == "checkID/pages/verify/verify");
}

TEST_CASE("main-phase fixture analysis sees no cataloged sites") {
  Mdg m = fixture_mdg(false);
  CHECK(find_practice_sites(m, ApiCatalog::builtin()).empty());
  CHECK(reachable_practices(m, ApiCatalog::builtin()).empty());
}

TEST_CASE("complete-phase fixture classifies each site") {
  Mdg m = fixture_mdg(true);
  std::vector<PrivacyPractice> ps = reachable_practices(m, ApiCatalog::builtin());
  REQUIRE(ps.size() == 3);

  SECTION("camera call is reachable through the shutter handler") {
    const PrivacyPractice* cam = by_api(ps, "wx.createCameraContext");
    REQUIRE(cam);
    CHECK(cam->verdict == "reachable");
    CHECK(cam->dead_kind.empty());
    CHECK(cam->entry_page == "checkID/pages/verify/verify");
    CHECK(cam->entry_kind == "gui-event");
    CHECK(cam->entry_handler == "onShutterTap");

    REQUIRE(cam->trigger_path.size() == 2);
    CHECK(cam->trigger_path.front().kind == "entry");
    CHECK(cam->trigger_path.front().label == "onShutterTap");
    CHECK(cam->trigger_path.front().node == "checkID/util/util.js#8");
    CHECK(cam->trigger_path.back().kind == "call-site");
    CHECK(cam->trigger_path.back().label == "wx.createCameraContext");
    CHECK(cam->trigger_path.back().node == "checkID/util/util.js#12");
  }

  SECTION("promo page is declared but unrouted, so its site is dead code") {
    const PrivacyPractice* addr = by_api(ps, "wx.chooseAddress");
    REQUIRE(addr);
    CHECK(addr->verdict == "dead-code");
    CHECK(addr->dead_kind == "orphaned-page");
    CHECK(addr->trigger_path.empty());
    CHECK(addr->entry_page.empty());
  }

  SECTION("handler that is never bound or called is dead code") {
    const PrivacyPractice* loc = by_api(ps, "wx.getLocation");
    REQUIRE(loc);
    CHECK(loc->verdict == "dead-code");
    CHECK(loc->dead_kind == "unused-function");
    CHECK(loc->trigger_path.empty());
  }

  SECTION("every practice gets exactly one classification") {
    for (const PrivacyPractice& p : ps) {
      if (p.verdict == "dead-code") {
        CHECK((p.dead_kind == "orphaned-page" || p.dead_kind == "unused-function"));
        CHECK(p.trigger_path.empty());
        CHECK(p.entry_handler.empty());
      } else {
        CHECK(p.verdict == "reachable");
        CHECK(p.dead_kind.empty());
        REQUIRE(!p.trigger_path.empty());
        CHECK(p.trigger_path.front().kind == "entry");
        CHECK(p.trigger_path.back().kind == "call-site");
        CHECK(p.trigger_path.back().node ==
              p.site.file + "#" + std::to_string(p.site.call_node));
      }
    }
  }
}

TEST_CASE("classification flips with routing and binding changes") {
  std::map<std::string, std::string> files = {
      {"app.json", R"({
        "pages": ["pages/a/a", "pages/tab/tab", "pages/orphan/orphan"],
        "tabBar": {"list": [{"pagePath": "pages/a/a"}, {"pagePath": "pages/tab/tab"}]}
      })"},
      {"app.js", "App({ onLaunch: function () { wx.getWeRunData({}); } });"},
      {"pages/a/a.wxml", "<view>a</view>"},
      {"pages/a/a.js",
       "var util = require('../../util/util.js');\n"
       "Page({\n"
       "  onLoad: function () { util.track(); },\n"
       "  unusedFn: function () { wx.chooseImage({}); }\n"
       "});"},
      {"util/util.js",
       "function track() { wx.getLocation({}); }\n"
       "module.exports = { track: track };"},
      {"pages/tab/tab.wxml", "<button bindtap=\"grab\">go</button>"},
      {"pages/tab/tab.js", "Page({ grab: function () { wx.getUserInfo({}); } });"},
      {"pages/orphan/orphan.wxml", "<view>o</view>"},
      {"pages/orphan/orphan.js", "Page({ onLoad: function () { wx.chooseAddress({}); } });"},
  };
  Mdg m = build(files);
  std::vector<PrivacyPractice> ps = reachable_practices(m, ApiCatalog::builtin());
  REQUIRE(ps.size() == 5);

  SECTION("app lifecycle sites are always live and carry no page") {
    const PrivacyPractice* run = by_api(ps, "wx.getWeRunData");
    REQUIRE(run);
    CHECK(run->verdict == "reachable");
    CHECK(run->site.page.empty());
    CHECK(run->entry_page.empty());
    CHECK(run->entry_kind == "lifecycle");
    CHECK(run->entry_handler == "onLaunch");
  }

  SECTION("module call reached through a page lifecycle records the call chain") {
    const PrivacyPractice* loc = by_api(ps, "wx.getLocation");
    REQUIRE(loc);
    CHECK(loc->verdict == "reachable");
    CHECK(loc->entry_page == "pages/a/a");
    CHECK(loc->entry_kind == "lifecycle");
    CHECK(loc->entry_handler == "onLoad");

    REQUIRE(loc->trigger_path.size() == 3);
    CHECK(loc->trigger_path[0].kind == "entry");
    CHECK(loc->trigger_path[0].label == "onLoad");
    CHECK(loc->trigger_path[1].kind == "direct-call");
    CHECK(loc->trigger_path[1].label == "track");
    CHECK(loc->trigger_path[2].kind == "call-site");
    CHECK(loc->trigger_path[2].label == "wx.getLocation");
  }

  SECTION("tab bar pages are reachability roots even without inbound routes") {
    const PrivacyPractice* user = by_api(ps, "wx.getUserInfo");
    REQUIRE(user);
    CHECK(user->verdict == "reachable");
    CHECK(user->entry_page == "pages/tab/tab");
    CHECK(user->entry_kind == "gui-event");
    CHECK(user->entry_handler == "grab");
  }

  SECTION("unbound handler on a live page is unused-function dead code") {
    const PrivacyPractice* img = by_api(ps, "wx.chooseImage");
    REQUIRE(img);
    CHECK(img->verdict == "dead-code");
    CHECK(img->dead_kind == "unused-function");
  }

  SECTION("declared page with no inbound route is orphaned-page dead code") {
    const PrivacyPractice* addr = by_api(ps, "wx.chooseAddress");
    REQUIRE(addr);
    CHECK(addr->verdict == "dead-code");
    CHECK(addr->dead_kind == "orphaned-page");
  }

  SECTION("binding the handler flips unused-function to reachable") {
    files["pages/a/a.wxml"] = "<button bindtap=\"unusedFn\">pick</button>";
    std::vector<PrivacyPractice> ps2 =
        reachable_practices(build(files), ApiCatalog::builtin());
    const PrivacyPractice* img = by_api(ps2, "wx.chooseImage");
    REQUIRE(img);
    CHECK(img->verdict == "reachable");
    CHECK(img->entry_kind == "gui-event");
    CHECK(img->entry_handler == "unusedFn");
  }

  SECTION("routing to the orphan flips orphaned-page to reachable") {
    files["pages/a/a.wxml"] =
        "<navigator url=\"/pages/orphan/orphan\">go</navigator>";
    std::vector<PrivacyPractice> ps2 =
        reachable_practices(build(files), ApiCatalog::builtin());
    const PrivacyPractice* addr = by_api(ps2, "wx.chooseAddress");
    REQUIRE(addr);
    CHECK(addr->verdict == "reachable");
    CHECK(addr->entry_page == "pages/orphan/orphan");
    CHECK(addr->entry_kind == "lifecycle");
    CHECK(addr->entry_handler == "onLoad");
  }
}

TEST_CASE("practice serialization includes category group and trigger path") {
  Mdg m = fixture_mdg(true);
  nlohmann::json doc =
      practices_to_json(reachable_practices(m, ApiCatalog::builtin()), "complete");
  CHECK(doc["phase"] == "complete");
  const nlohmann::json& j = doc["practices"];
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);

  for (const nlohmann::json& p : j) {
    CHECK(p.contains("api"));
    CHECK(p.contains("category"));
    CHECK(p.contains("group"));
    CHECK(p.contains("verdict"));
  }

  auto cam = std::find_if(j.begin(), j.end(), [](const nlohmann::json& p) {
    return p["api"] == "wx.createCameraContext";
  });
  REQUIRE(cam != j.end());
  CHECK((*cam)["group"] == "Device");
  REQUIRE(cam->contains("entry"));
  CHECK((*cam)["entry"]["handler"] == "onShutterTap");
  REQUIRE(cam->contains("trigger_path"));
  CHECK((*cam)["trigger_path"].size() == 2);
  CHECK_FALSE(cam->contains("dead_kind"));

  auto addr = std::find_if(j.begin(), j.end(), [](const nlohmann::json& p) {
    return p["api"] == "wx.chooseAddress";
  });
  REQUIRE(addr != j.end());
  CHECK((*addr)["dead_kind"] == "orphaned-page");
  CHECK_FALSE(addr->contains("trigger_path"));
}
