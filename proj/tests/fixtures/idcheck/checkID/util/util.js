function init(pageContext) {
  pageContext.onShutterTap = function () {
    var camera = wx.createCameraContext();
    camera.takePhoto({
      success: function (res) {
        pageContext.setData({ imagePath: res.tempImagePath });
      }
    });
  };
}

module.exports = { init: init };
