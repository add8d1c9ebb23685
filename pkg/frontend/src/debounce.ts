// Trailing-edge debounce so slider drags send one steer message per
// settle, not one per pixel.

export function debounce<T>(fn: (value: T) => void, delayMs: number): (value: T) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (value: T) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(value);
    }, delayMs);
  };
}
