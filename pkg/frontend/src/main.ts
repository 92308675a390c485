import { Connection } from "./connection";
import { SandboxController } from "./controller";
import { Hud } from "./hud";
import { SandboxScene } from "./scene";

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const override = params.get("ws");
  if (override) return override;
  if (window.location.protocol.startsWith("http") && window.location.host) {
    const scheme = window.location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${window.location.host}/`;
  }
  return "ws://127.0.0.1:8765/";
}

const container = document.getElementById("app")!;

let controller: SandboxController;
const connection = new Connection(serviceUrl(), (url) => new WebSocket(url), {
  onOpen: () => {
    controller.model.setConnected(true);
    controller.pushUpdate(); // populate the view with the initial markers
  },
  onClose: () => controller.model.setConnected(false),
  onMessage: (msg) => controller.model.applyServer(msg),
});
controller = new SandboxController(connection);

const scene = new SandboxScene(container, controller);
const hud = new Hud(container, controller, scene);

connection.connect();
scene.start();
hud.startSyncLoop();
