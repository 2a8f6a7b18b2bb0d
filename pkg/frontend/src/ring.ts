// Fixed-capacity ring buffer; oldest entries fall off as new ones arrive.

export class Ring<T> {
  private buf: T[] = [];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be positive");
  }

  push(item: T): void {
    if (this.count < this.capacity) {
      this.buf.push(item);
      this.count++;
    } else {
      this.buf[this.head] = item;
      this.head = (this.head + 1) % this.capacity;
    }
  }

  get length(): number {
    return this.count;
  }

  clear(): void {
    this.buf = [];
    this.head = 0;
    this.count = 0;
  }

  // oldest to newest
  toArray(): T[] {
    return this.buf.slice(this.head).concat(this.buf.slice(0, this.head));
  }

  last(): T | undefined {
    if (this.count === 0) return undefined;
    const idx = (this.head + this.count - 1) % this.capacity;
    return this.buf[idx];
  }
}
