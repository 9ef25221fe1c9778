import { ApiClient } from "./api.js";
import { AnnotatorView } from "./annotator_view.js";
import { PlaybackView } from "./playback_view.js";
import { ScenarioView } from "./scenario_view.js";

const api = new ApiClient("");

function install(): void {
  const app = document.querySelector("#app")!;
  const header = document.createElement("div");
  header.className = "toolbar";
  header.innerHTML = `
    <b>socnavgen</b>
    <label>Bundle <input id="bundle-name" size="16" value="session"></label>
    <nav>
      <button data-tab="annotate" class="primary">1 Annotate</button>
      <button data-tab="scenario">2 Scenario &amp; paths</button>
      <button data-tab="playback">3 Playback</button>
    </nav>`;
  app.appendChild(header);

  const bundleInput = header.querySelector<HTMLInputElement>("#bundle-name")!;
  const bundleName = () => bundleInput.value.trim() || "session";

  const scenario = new ScenarioView(api, bundleName);
  const playback = new PlaybackView(api, bundleName);
  const annotator = new AnnotatorView(api, bundleName, () => void scenario.refresh());

  const views: Record<string, HTMLElement> = {
    annotate: annotator.root,
    scenario: scenario.root,
    playback: playback.root,
  };
  for (const view of Object.values(views)) {
    view.style.display = "none";
    app.appendChild(view);
  }

  const show = (tab: string) => {
    for (const [name, view] of Object.entries(views)) {
      view.style.display = name === tab ? "" : "none";
    }
    for (const button of header.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
      button.classList.toggle("primary", button.dataset.tab === tab);
    }
    if (tab === "scenario") void scenario.refresh();
    if (tab === "playback") void playback.refresh();
  };
  for (const button of header.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
    button.onclick = () => show(button.dataset.tab!);
  }

  show("annotate");
  void annotator.init();
}

install();
