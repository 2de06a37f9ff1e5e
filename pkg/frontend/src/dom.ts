// Mounts an element-descriptor tree into the real DOM. This is the
// only module that touches document; everything else stays testable
// without a browser.

import { VNode } from "./vnode";

export function toElement(node: VNode | string): Node {
  if (typeof node === "string") {
    return document.createTextNode(node);
  }
  const el = document.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    if (name === "checked" && node.tag === "input") {
      (el as HTMLInputElement).checked = true;
    } else if (name === "value" && "value" in el) {
      (el as HTMLInputElement).value = value;
    } else {
      el.setAttribute(name, value);
    }
  }
  for (const [name, value] of Object.entries(node.style)) {
    (el.style as unknown as Record<string, string>)[name] = value;
  }
  for (const [event, handler] of Object.entries(node.on)) {
    el.addEventListener(event, handler);
  }
  for (const child of node.children) {
    el.appendChild(toElement(child));
  }
  return el;
}

export function mount(root: HTMLElement, tree: VNode): void {
  root.replaceChildren(toElement(tree));
}
