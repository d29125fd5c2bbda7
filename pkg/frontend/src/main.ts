import "./style.css";
import { AiqClient } from "./api";
import { ConsoleApp } from "./app";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}

const app = new ConsoleApp(root, new AiqClient(""));
void app.mount().then(() => {
  app.startPolling();
});
