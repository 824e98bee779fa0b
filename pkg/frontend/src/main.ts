import { ApiClient } from "./api.js";
import { UiController } from "./controller.js";
import { mountApp } from "./app.js";

const api = new ApiClient("");
const controller = new UiController(api, 1000, (q) => window.confirm(q));
mountApp(controller);
