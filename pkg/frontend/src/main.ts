import { ApiClient, fetchTransport } from "./api.js";
import { PlaygroundStore } from "./store.js";
import { PlaygroundUI } from "./ui.js";
import { StateDoc } from "./types.js";

const WORKSPACE_ID = "playground";

function emptyWorkspace(): StateDoc {
  return {
    id: WORKSPACE_ID,
    revision: 0,
    pose: { position: [0, 0, 0], forward: [0, 0, 1] },
    zones: [],
    occlusions: [],
    windows: [],
    pending: null,
    events: [],
  };
}

async function boot() {
  const api = new ApiClient(fetchTransport(""));
  const store = new PlaygroundStore(api, WORKSPACE_ID);
  try {
    await api.createWorkspace(emptyWorkspace());
  } catch {
    // session already exists (page reload): just reattach
  }
  await store.refresh();
  const root = document.getElementById("app")!;
  const canvas = document.getElementById("canvas") as HTMLCanvasElement;
  new PlaygroundUI(store, root, canvas).render();
}

void boot();
