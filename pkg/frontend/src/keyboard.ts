// Keyboard shortcuts: digits pick candidate k, Enter confirms, N skips,
// E opens the custom-term editor. While typing a custom term only Enter
// and Escape are intercepted.

export type KeyAction =
  | { kind: "select"; index: number }
  | { kind: "confirm" }
  | { kind: "skip" }
  | { kind: "custom" }
  | { kind: "cancel-custom" }
  | { kind: "none" };

export function mapKey(key: string, opts: { customMode: boolean; inInput: boolean }): KeyAction {
  if (opts.customMode || opts.inInput) {
    if (key === "Enter") return { kind: "confirm" };
    if (key === "Escape") return { kind: "cancel-custom" };
    return { kind: "none" };
  }
  if (key >= "1" && key <= "9") {
    return { kind: "select", index: Number(key) - 1 };
  }
  if (key === "Enter") return { kind: "confirm" };
  if (key === "n" || key === "N") return { kind: "skip" };
  if (key === "e" || key === "E") return { kind: "custom" };
  if (key === "Escape") return { kind: "cancel-custom" };
  return { kind: "none" };
}
