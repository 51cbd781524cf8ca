App({
  onLaunch: function () {}
});
