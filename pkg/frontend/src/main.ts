import { JudgeApi } from "./api.js";
import { ChatStore } from "./store.js";
import { ChatView } from "./view.js";

const store = new ChatStore(new JudgeApi(""));
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
new ChatView(root, store, {
  domains: ["movie", "restaurant", "taxi"],
  agents: ["rule", "rl"],
}).mount();
