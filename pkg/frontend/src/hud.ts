/**
 * HUD panel: connection banner, solve/filter timing, minimum capsule
 * distance with its color band, fallback-flag badges, the safety-filter
 * toggle, pose reset, and camera presets.
 */
import { SandboxController } from "./controller";
import { SandboxScene } from "./scene";

export class Hud {
  private root: HTMLElement;
  private banner: HTMLElement;
  private status: HTMLElement;
  private timing: HTMLElement;
  private distance: HTMLElement;
  private flags: HTMLElement;
  private filterToggle: HTMLInputElement;
  private filterBadge: HTMLElement;

  constructor(
    container: HTMLElement,
    private readonly controller: SandboxController,
    scene: SandboxScene,
  ) {
    this.root = document.createElement("div");
    this.root.className = "hud";
    this.root.innerHTML = `
      <div class="row"><span class="status"></span></div>
      <div class="row timing"></div>
      <div class="row distance"></div>
      <label class="row toggle">
        <input type="checkbox" class="filter" checked />
        safety filter <span class="filter-badge"></span>
      </label>
      <div class="row flags"></div>
      <div class="row buttons">
        <button data-preset="front">front</button>
        <button data-preset="side">side</button>
        <button data-preset="top">top</button>
        <button class="reset">reset pose</button>
      </div>
      <div class="row legend">
        <span class="band safe">safe</span>
        <span class="band near">near</span>
        <span class="band violated">violated</span>
      </div>`;
    container.appendChild(this.root);

    this.banner = document.createElement("div");
    this.banner.className = "banner";
    this.banner.textContent = "disconnected - input disabled";
    container.appendChild(this.banner);

    this.status = this.root.querySelector(".status")!;
    this.timing = this.root.querySelector(".timing")!;
    this.distance = this.root.querySelector(".distance")!;
    this.flags = this.root.querySelector(".flags")!;
    this.filterToggle = this.root.querySelector(".filter")!;
    this.filterBadge = this.root.querySelector(".filter-badge")!;

    this.filterToggle.addEventListener("change", () => {
      this.controller.toggleFilter(this.filterToggle.checked);
    });
    this.root.querySelector(".reset")!.addEventListener("click", () => {
      this.controller.resetPose();
    });
    for (const button of Array.from(this.root.querySelectorAll<HTMLButtonElement>("[data-preset]"))) {
      button.addEventListener("click", () => scene.setCameraPreset(button.dataset.preset!));
    }
  }

  sync(): void {
    const hud = this.controller.model.hud();
    this.banner.style.display = hud.connected ? "none" : "block";
    this.status.textContent = hud.connected
      ? `connected, frame ${hud.frame ?? "-"}`
      : "disconnected";
    this.timing.textContent =
      hud.solveMs === null
        ? "solve: -"
        : `solve ${hud.solveMs.toFixed(2)} ms, filter ${hud.filterMs?.toFixed(2) ?? "0"} ms`;
    if (hud.minDistance === null) {
      this.distance.textContent = "min distance: -";
      this.distance.className = "row distance";
    } else {
      const band = this.controller.model.bandOf(hud.minDistance);
      this.distance.textContent = `min distance ${(hud.minDistance * 1000).toFixed(1)} mm`;
      this.distance.className = `row distance ${band}`;
    }
    this.filterToggle.checked = hud.filterOn;
    this.filterToggle.disabled = !hud.connected;
    this.filterBadge.textContent = hud.filterPending
      ? "(pending)"
      : hud.held
        ? "HELD"
        : hud.filterActive
          ? "ACTIVE"
          : "";
    this.flags.textContent = hud.flags.length ? hud.flags.join("  ") : "";
  }

  startSyncLoop(): void {
    const loop = () => {
      this.sync();
      requestAnimationFrame(loop);
    };
    loop();
  }
}
