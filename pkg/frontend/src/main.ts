import { ApiClient } from "./api";
import { App } from "./app";

const root = typeof document !== "undefined" ? document.getElementById("app") : null;
if (root !== null) {
  const baseUrl = root.dataset.apiBase ?? "/api/v1";
  const app = new App(new ApiClient(baseUrl), root);
  app.loadCanned("status_quo");
  void app.simulate();
  void app.refreshScenarios();
}
