// DOM wiring: renders the controller's view model and forwards events.

import { UiController } from "./controller.js";
import { RunView } from "./gallery.js";
import { UiJobView } from "./controller.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fillSelect(select: HTMLSelectElement, values: string[], chosen: string) {
  select.innerHTML = "";
  for (const value of values) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    option.selected = value === chosen;
    select.appendChild(option);
  }
}

function renderStrip(container: HTMLElement, title: string, view: UiJobView) {
  const strip = document.createElement("div");
  strip.className = "strip";
  const heading = document.createElement("h3");
  heading.textContent = `${title} - ${view.options.style} (${view.stageLabel})`;
  strip.appendChild(heading);
  const row = document.createElement("div");
  row.className = "pages";
  for (const url of view.pageUrls) {
    const img = document.createElement("img");
    img.src = url;
    img.alt = "comic page";
    row.appendChild(img);
  }
  strip.appendChild(row);
  container.appendChild(strip);
}

export function mountApp(controller: UiController): void {
  const fileInput = el<HTMLInputElement>("input-file");
  const urlInput = el<HTMLInputElement>("input-url");
  const sampleSelect = el<HTMLSelectElement>("input-sample");
  const kInput = el<HTMLInputElement>("opt-k");
  const nInput = el<HTMLInputElement>("opt-n");
  const styleSelect = el<HTMLSelectElement>("opt-style");
  const aestheticSelect = el<HTMLSelectElement>("opt-aesthetic");
  const framesSelect = el<HTMLSelectElement>("opt-frames");
  const submitButton = el<HTMLButtonElement>("submit");
  const rerunButton = el<HTMLButtonElement>("rerun");
  const banner = el<HTMLDivElement>("banner");
  const validation = el<HTMLDivElement>("validation");
  const status = el<HTMLDivElement>("status");
  const results = el<HTMLDivElement>("results");
  const galleryBox = el<HTMLDivElement>("gallery");

  let optionsFilled = false;

  const render = () => {
    const vm = controller.viewModel();

    if (vm.options && !optionsFilled) {
      optionsFilled = true;
      fillSelect(styleSelect, vm.options.style, vm.options.defaults.style);
      fillSelect(aestheticSelect, vm.options.aesthetic, vm.options.defaults.aesthetic);
      fillSelect(framesSelect, vm.options.frames_mode, vm.options.defaults.frames_mode);
      kInput.value = String(vm.options.defaults.k);
      sampleSelect.innerHTML = "<option value=''>(none)</option>";
      for (const sample of vm.samples) {
        const option = document.createElement("option");
        option.value = sample.name;
        option.textContent = `${sample.name} (${sample.duration_s}s)`;
        sampleSelect.appendChild(option);
      }
    }

    submitButton.disabled = !vm.canSubmit;
    rerunButton.disabled = vm.busy || vm.current === null;
    validation.textContent = vm.validationErrors.join("; ");
    banner.textContent = vm.banner ? vm.banner.text : "";
    banner.className = vm.banner ? `banner ${vm.banner.kind}` : "banner hidden";
    status.textContent = vm.current ? vm.current.stageLabel : "";

    results.innerHTML = "";
    if (vm.current && vm.current.state === "done") {
      renderStrip(results, "current", vm.current);
    }
    if (vm.previous && vm.previous.state === "done") {
      renderStrip(results, "previous", vm.previous);
    }

    galleryBox.innerHTML = "";
    for (const run of vm.gallery) {
      const item = document.createElement("div");
      item.className = "gallery-item";
      item.textContent = `${run.label} - ${run.pageUrls.length} page(s)`;
      galleryBox.appendChild(item);
    }
  };

  controller.onChange(render);

  fileInput.addEventListener("change", () => {
    controller.setInput({ file: fileInput.files?.[0] ?? null });
  });
  urlInput.addEventListener("input", () => {
    controller.setInput({ url: urlInput.value });
  });
  sampleSelect.addEventListener("change", () => {
    controller.setInput({ sample: sampleSelect.value });
  });
  kInput.addEventListener("input", () => {
    controller.setRunOption("k", Number(kInput.value));
  });
  nInput.addEventListener("input", () => {
    controller.setRunOption("n", nInput.value === "" ? null : Number(nInput.value));
  });
  styleSelect.addEventListener("change", () => {
    controller.setRunOption("style", styleSelect.value);
  });
  aestheticSelect.addEventListener("change", () => {
    controller.setRunOption("aesthetic", aestheticSelect.value);
  });
  framesSelect.addEventListener("change", () => {
    controller.setRunOption("frames_mode", framesSelect.value);
  });
  submitButton.addEventListener("click", () => {
    controller.submitForm().catch(() => undefined);
  });
  rerunButton.addEventListener("click", () => {
    controller.rerunWith({ style: styleSelect.value }).catch(() => undefined);
  });

  void controller.init().then(render);
  render();
}
