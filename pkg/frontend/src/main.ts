import { AnnotationApi } from "./api.js";
import { AnnotationApp } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const backend = params.get("backend") ?? "http://127.0.0.1:8077";
const annotator = params.get("annotator") ?? "annotator";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = new AnnotationApp(new AnnotationApi(backend), root, annotator);
void app.showBrowser();
