// The console controller: owns the model, the connection, and the
// debounced steering control. Renderers subscribe to model changes.

import { SessionConnection, SocketFactory } from "./connection.js";
import { debounce } from "./debounce.js";
import { ConsoleModel, initialModel, reduce } from "./model.js";
import { loadSceneMsg, startMsg, steerMsg, stopMsg } from "./protocol.js";

export const STEER_DEBOUNCE_MS = 50;

export class SteeringConsole {
  model: ConsoleModel = initialModel();
  private connection: SessionConnection;
  private listeners: ((m: ConsoleModel) => void)[] = [];
  private sendSteer: (gamma: number) => void;

  constructor(url: string, factory?: SocketFactory) {
    this.connection = new SessionConnection(
      url,
      {
        onOpen: () => this.dispatch({ kind: "connected" }),
        onClose: () => this.dispatch({ kind: "disconnected" }),
        onMessage: (msg) => this.dispatch({ kind: "server", msg }),
      },
      factory,
    );
    this.sendSteer = debounce((gamma: number) => {
      this.connection.send(steerMsg(gamma));
    }, STEER_DEBOUNCE_MS);
  }

  connect(): void {
    this.dispatch({ kind: "connecting" });
    this.connection.connect();
  }

  subscribe(listener: (m: ConsoleModel) => void): void {
    this.listeners.push(listener);
  }

  private dispatch(event: Parameters<typeof reduce>[1]): void {
    this.model = reduce(this.model, event);
    for (const listener of this.listeners) listener(this.model);
  }

  // slider input: reflect immediately in the control, send debounced;
  // offline the control is disabled and nothing is emitted
  onSliderChange(gammaDeg: number): void {
    if (!this.connection.isOpen) return;
    this.dispatch({ kind: "slider", gamma_deg: gammaDeg });
    this.sendSteer(gammaDeg);
  }

  loadScene(scene: object | string): void {
    this.connection.send(loadSceneMsg(scene));
  }

  start(): void {
    this.connection.send(startMsg());
  }

  stop(): void {
    this.connection.send(stopMsg());
  }
}
