#pragma once

/// Catalog of privacy-relevant platform APIs.
///
/// Maps dotted API names to the data category they touch. Categories
/// roll up into five groups used for reporting. The built-in table can
/// be replaced or extended from a JSON object {"api": "category"}.

#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "miniscope/common.hpp"

namespace miniscope {

struct ApiCatalog {
  std::map<std::string, std::string> category_of;

  bool contains(const std::string& api) const { return category_of.count(api) != 0; }

  std::optional<std::string> category(const std::string& api) const {
    auto it = category_of.find(api);
    if (it == category_of.end()) return std::nullopt;
    return it->second;
  }

  static ApiCatalog builtin() {
    ApiCatalog c;
    c.category_of = {
        {"wx.chooseLocation", "UserLocation"},
        {"wx.getLocation", "UserLocation"},
        {"wx.onLocationChange", "UserLocation"},
        {"wx.startLocationUpdateBackground", "UserLocation"},
        {"wx.chooseImage", "ChooseMedia/File"},
        {"wx.chooseMedia", "ChooseMedia/File"},
        {"wx.chooseMessageFile", "ChooseMedia/File"},
        {"wx.chooseVideo", "ChooseMedia/File"},
        {"wx.chooseAddress", "Address"},
        {"wx.chooseInvoiceTitle", "Invoice"},
        {"wx.getUserInfo", "UserInfo"},
        {"wx.getUserProfile", "UserInfo"},
        {"wx.getWeRunData", "WeRun"},
        {"wx.addPhoneContact", "PhoneContact"},
        {"wx.addPhoneCalendar", "PhoneCalendar"},
        {"wx.createCameraContext", "Camera"},
        {"wx.createLivePusherContext", "Camera"},
        {"wx.getRecordManager", "Record"},
        {"wx.openBluetoothAdapter", "Bluetooth"},
        {"wx.getClipboardData", "Clipboard"},
        {"wx.setClipboardData", "Clipboard"},
        {"wx.saveImageToPhotosAlbum", "PhotoAlbum"},
        {"wx.saveVideoToPhotoAlbum", "PhotoAlbum"},
    };
    return c;
  }

  static ApiCatalog from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "api catalog must be an object");
    ApiCatalog c;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_string())
        throw Error(ErrorCode::InvalidConfig, "api category must be a string: " + it.key());
      c.category_of[it.key()] = it.value().get<std::string>();
    }
    return c;
  }
};

// Reporting group for a category. Unknown categories fall into "Other".
inline std::string category_group(const std::string& category) {
  static const std::map<std::string, std::string> groups = {
      {"UserLocation", "Location"},    {"ChooseMedia/File", "Media"},
      {"Address", "OpenAPI"},          {"Invoice", "OpenAPI"},
      {"UserInfo", "OpenAPI"},         {"WeRun", "OpenAPI"},
      {"PhoneContact", "Device"},      {"PhoneCalendar", "Device"},
      {"Camera", "Device"},            {"Record", "Device"},
      {"Bluetooth", "Device"},         {"Clipboard", "Device"},
      {"PhotoAlbum", "Album"},
  };
  auto it = groups.find(category);
  return it == groups.end() ? "Other" : it->second;
}

}  // namespace miniscope
