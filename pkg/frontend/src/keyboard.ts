/**
 * Keyboard shortcuts for the review flow. Bindings are suppressed while
 * typing in an input or textarea, except the editor's submit/close combos.
 */

import type { QueueController } from "./queue.js";

export function keyBindings(queue: QueueController): Record<string, () => void> {
  return {
    a: () => void queue.accept(),
    r: () => void queue.reject(),
    e: () => queue.openEditor(),
    n: () => queue.next(),
    arrowright: () => queue.next(),
    p: () => queue.previous(),
    arrowleft: () => queue.previous(),
  };
}

export function attachKeyboard(
  queue: QueueController,
  target: Pick<Window, "addEventListener" | "removeEventListener">,
): () => void {
  const bindings = keyBindings(queue);
  const handler = (event: Event) => {
    const keyEvent = event as KeyboardEvent;
    const element = keyEvent.target as HTMLElement | null;
    const tag = element?.tagName ?? "";
    const typing = tag === "INPUT" || tag === "TEXTAREA";

    if (typing) {
      if (keyEvent.key === "Enter" && (keyEvent.ctrlKey || keyEvent.metaKey)) {
        keyEvent.preventDefault();
        void queue.submitEdit();
      } else if (keyEvent.key === "Escape") {
        keyEvent.preventDefault();
        queue.closeEditor();
      }
      return;
    }

    const action = bindings[keyEvent.key.toLowerCase()];
    if (action) {
      keyEvent.preventDefault();
      action();
    }
  };
  target.addEventListener("keydown", handler);
  return () => target.removeEventListener("keydown", handler);
}
