// A tiny element-descriptor tree. Render functions build these trees;
// the DOM adapter mounts them, and tests assert on them directly.

export type EventHandler = (event?: unknown) => void;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  style: Record<string, string>;
  on: Record<string, EventHandler>;
  children: Array<VNode | string>;
}

export interface VNodeOptions {
  attrs?: Record<string, string>;
  style?: Record<string, string>;
  on?: Record<string, EventHandler>;
}

export function h(
  tag: string,
  options: VNodeOptions = {},
  children: Array<VNode | string> = [],
): VNode {
  return {
    tag,
    attrs: options.attrs ?? {},
    style: options.style ?? {},
    on: options.on ?? {},
    children,
  };
}

// Depth-first search over a tree; the predicate sees every VNode.
export function findAll(root: VNode, match: (node: VNode) => boolean): VNode[] {
  const found: VNode[] = [];
  const stack: VNode[] = [root];
  while (stack.length > 0) {
    const node = stack.pop() as VNode;
    if (match(node)) found.push(node);
    for (let i = node.children.length - 1; i >= 0; i--) {
      const child = node.children[i];
      if (typeof child !== "string") stack.push(child);
    }
  }
  return found;
}

export function findByClass(root: VNode, className: string): VNode[] {
  return findAll(root, (node) => {
    const classes = (node.attrs.class ?? "").split(/\s+/);
    return classes.includes(className);
  });
}

export function textOf(node: VNode): string {
  let out = "";
  for (const child of node.children) {
    out += typeof child === "string" ? child : textOf(child);
  }
  return out;
}
