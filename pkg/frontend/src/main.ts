import { ElicitationApp } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  void new ElicitationApp(root).start();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
