var util = require("../../util/util.js");

Page({
  data: {
    imagePath: "",
    idCard: ""
  },
  onReady: function () {
    util.init(this);
  },
  onInput: function (event) {
    this.setData({ idCard: event.detail.value });
  },
  getMyLocation: function () {
    wx.getLocation({ type: "wgs84" });
  }
});
