/**
 * Browser entry point. URL parameters:
 *   ?server=host:port&mode=mouse|replay|live&participant=id
 * In replay mode a file picker asks for a gaze/1 trace; in mouse mode the
 * cursor stands in for gaze.
 */
import { DisplayModel } from "./displayModel.js";
import {
  GazeMode,
  MouseEmulator,
  TraceReplayer,
  parseTrace,
} from "./gazeSource.js";
import { QuestionForm, RatingsForm } from "./forms.js";
import {
  encodeClientMessage,
  parseServerMessage,
  ServerMessage,
} from "./protocol.js";
import { checkViewport, errorBanner, mount, renderPage } from "./render.js";
import { WsClient } from "./wsClient.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? window.location.host;
const mode = (params.get("mode") ?? "mouse") as GazeMode;
const participant = params.get("participant") ?? `p-${Date.now()}`;

const root = document.getElementById("app") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;

const model = new DisplayModel();
let questionForm: QuestionForm | null = null;
const ratingsForm = new RatingsForm();
let replayer: TraceReplayer | null = null;
let renderQueued = false;

function setBanner(text: string, kind: "info" | "error" = "info"): void {
  banner.textContent = text;
  banner.className = `banner ${kind}` + (text ? "" : " hidden");
}

function send(msg: Parameters<typeof encodeClientMessage>[0]): void {
  client.send(encodeClientMessage(msg));
}

const emulator = new MouseEmulator((gaze) => {
  if (model.phase === "reading") send(gaze);
});

function queueRender(): void {
  // coalesce to one repaint per animation frame
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    paint();
  });
}

function paint(): void {
  root.replaceChildren();
  if (model.phase === "reading" && model.doc) {
    const check = checkViewport(model.doc, window.innerWidth, window.innerHeight);
    if (!check.ok) {
      root.appendChild(mount(errorBanner(
        `This document needs a ${check.required.w}x${check.required.h} viewport; ` +
        "resize the window instead of rescaling."), document));
      return;
    }
    root.appendChild(mount(
      renderPage(model.doc, model.bars, check.required.w, check.required.h),
      document));
  } else if (model.phase === "questions" && questionForm) {
    const node = mount(questionForm.render(() => undefined), document);
    bindForm(node);
    root.appendChild(node);
  } else if (model.phase === "ratings") {
    const node = mount(ratingsForm.render(), document);
    bindRatings(node);
    root.appendChild(node);
  } else if (model.phase === "done") {
    root.appendChild(mount(errorBanner("Session complete. Thank you."), document));
  }
}

function bindForm(nodeRoot: Element): void {
  nodeRoot.querySelectorAll("[data-item]").forEach((elem) => {
    elem.addEventListener("click", () => {
      if (!questionForm) return;
      questionForm.setAnswer(
        Number(elem.getAttribute("data-item")),
        Number(elem.getAttribute("data-value")));
      queueRender();
    });
  });
  nodeRoot.querySelector(".submit")?.addEventListener("click", () => {
    if (questionForm?.complete) {
      send(questionForm.toMessage());
      questionForm = null;
    }
  });
}

function bindRatings(nodeRoot: Element): void {
  nodeRoot.querySelectorAll("[data-item]").forEach((elem) => {
    elem.addEventListener("click", () => {
      ratingsForm.setValue(
        Number(elem.getAttribute("data-item")),
        Number(elem.getAttribute("data-value")));
      queueRender();
    });
  });
  nodeRoot.querySelector(".submit")?.addEventListener("click", () => {
    if (ratingsForm.complete) {
      send(ratingsForm.toMessage());
      model.phase = "done";
      emulator.stop();
      queueRender();
    }
  });
}

function handleServer(msg: ServerMessage): void {
  switch (msg.type) {
    case "SHOW_DOC": {
      model.loadDocument(msg.doc);
      queueRender();
      send({ type: "DOC_READY", docId: msg.doc.id });
      startGaze();
      break;
    }
    case "HIGHLIGHT":
    case "DESATURATE":
    case "REMOVE":
      model.applyCommand(msg);
      queueRender();
      break;
    case "QUESTIONS": {
      emulator.stop();
      model.phase = "questions";
      questionForm = new QuestionForm(msg.docId, msg.items);
      queueRender();
      break;
    }
    case "END":
      model.phase = "ratings";
      queueRender();
      break;
    case "ERROR":
      setBanner(`${msg.code}: ${msg.message}`, "error");
      break;
  }
}

function startGaze(): void {
  if (mode === "mouse") {
    emulator.start();
  } else if (mode === "replay" && replayer) {
    replayer.start();
    const pumpLoop = () => {
      replayer?.pump();
      if (replayer && !replayer.done && model.phase === "reading") {
        requestAnimationFrame(pumpLoop);
      } else if (replayer?.done && model.doc) {
        send({ type: "NEXT", docId: model.doc.id });
      }
    };
    requestAnimationFrame(pumpLoop);
  }
  // live mode: an external feed posts GAZE messages via window.postMessage
}

const client = new WsClient(
  `ws://${server}/session`,
  {
    onMessage: (text) => handleServer(parseServerMessage(text)),
    onStatus: (status) => {
      if (status === "open") {
        setBanner("");
        send({ type: "HELLO", participantId: participant });
      } else if (status === "reconnecting") {
        emulator.stop();
        setBanner("Connection lost; reconnecting...", "error");
      } else if (status === "closed") {
        emulator.stop();
        setBanner("Disconnected.", "error");
      }
    },
  },
  (url) => new WebSocket(url) as unknown as import("./wsClient.js").SocketLike,
);

document.addEventListener("mousemove", (event) => {
  emulator.moveTo(event.clientX, event.clientY);
});

document.addEventListener("keydown", (event) => {
  if (event.key === "n" && model.phase === "reading" && model.doc) {
    send({ type: "NEXT", docId: model.doc.id });
  }
});

window.addEventListener("message", (event) => {
  if (mode === "live" && event.data?.type === "GAZE" && model.phase === "reading") {
    send(event.data);
  }
});

if (mode === "replay") {
  const picker = document.getElementById("trace-picker") as HTMLInputElement;
  picker.classList.remove("hidden");
  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    replayer = new TraceReplayer(parseTrace(await file.text()),
                                 (gaze) => send(gaze));
    picker.classList.add("hidden");
    client.connect();
  });
} else {
  client.connect();
}
