import { ExplorerApp } from "./app.js";
import { ApiClient } from "./client.js";
import { HttpTransport } from "./transport.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
const app = new ExplorerApp(root, new ApiClient(new HttpTransport()));
void app.start();
