// WebSocket client wiring for the console: parses server messages into the
// view model and exposes a send hook for commands.

import { parseServerMessage } from './protocol';
import { ViewModel } from './viewmodel';

export interface ConnectionHandle {
  socket: WebSocket;
  close(): void;
}

export function connect(
  url: string,
  vm: ViewModel,
  onUpdate: () => void,
  reconnectDelayMs = 2000,
): ConnectionHandle {
  let closedByUser = false;
  let socket = new WebSocket(url);

  const attach = (ws: WebSocket) => {
    vm.bindSender((raw) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(raw);
    });
    ws.onmessage = (ev) => {
      try {
        vm.handle(parseServerMessage(String(ev.data)));
      } catch (err) {
        vm.lastError = err instanceof Error ? err.message : String(err);
      }
      onUpdate();
    };
    ws.onclose = () => {
      vm.closed();
      onUpdate();
      if (!closedByUser) {
        setTimeout(() => {
          vm.connection = 'connecting';
          socket = new WebSocket(url);
          attach(socket);
        }, reconnectDelayMs);
      }
    };
  };
  attach(socket);

  return {
    get socket() {
      return socket;
    },
    close() {
      closedByUser = true;
      socket.close();
    },
  };
}
