/** DOM wiring for the review UI. Keyboard-first: the queue is a small slice
 * of a large dataset, so throughput matters.
 *
 *   a  accept     r  reject     b  toggle box-draw mode
 *   n  next item  p  previous   enter  submit drawn box (reprompt)
 */

import { ReviewApi } from './api.js';
import type { Box, QueueItem } from './api.js';
import { boxFromDrag, clampBoxToImage, drawBox, drawMaskOverlay } from './canvas.js';
import { ReviewSession } from './state.js';

const api = new ReviewApi('');
const session = new ReviewSession(api);

const el = {
  queueList: document.getElementById('queue-list') as HTMLUListElement,
  queueTotal: document.getElementById('queue-total') as HTMLSpanElement,
  emptyState: document.getElementById('empty-state') as HTMLDivElement,
  recordPane: document.getElementById('record-pane') as HTMLDivElement,
  recordTitle: document.getElementById('record-title') as HTMLHeadingElement,
  flagList: document.getElementById('flag-list') as HTMLUListElement,
  sourceImage: document.getElementById('source-image') as HTMLImageElement,
  overlay: document.getElementById('overlay-canvas') as HTMLCanvasElement,
  status: document.getElementById('status-line') as HTMLDivElement,
};

let boxMode = false;
let dragStart: { x: number; y: number } | null = null;
let drawnBox: Box | null = null;

function setStatus(text: string) {
  el.status.textContent = text;
}

function canvasPoint(evt: MouseEvent): { x: number; y: number } {
  const rect = el.overlay.getBoundingClientRect();
  const sx = el.overlay.width / rect.width;
  const sy = el.overlay.height / rect.height;
  return { x: (evt.clientX - rect.left) * sx, y: (evt.clientY - rect.top) * sy };
}

function redraw() {
  const view = session.current;
  if (!view) return;
  el.overlay.width = view.width;
  el.overlay.height = view.height;
  const ctx = el.overlay.getContext('2d')!;
  ctx.clearRect(0, 0, view.width, view.height);
  const mask = session.decodedMask();
  if (mask) drawMaskOverlay(ctx, mask, view.width, view.height);
  if (view.record.detection) drawBox(ctx, view.record.detection.box, '#2d7ff9');
  if (drawnBox) drawBox(ctx, drawnBox, '#18c964');
}

function renderQueue() {
  const queue = session.queue;
  if (!queue) return;
  el.queueTotal.textContent = String(queue.total);
  el.queueList.replaceChildren(
    ...queue.items.map((item: QueueItem) => {
      const li = document.createElement('li');
      li.dataset.recordId = item.record_id;
      const img = document.createElement('img');
      img.src = item.thumbnail_url;
      img.onerror = () => img.classList.add('missing'); // placeholder; item stays actionable
      const label = document.createElement('span');
      label.textContent = `${item.record_id} [${item.flags.join(', ')}]`;
      li.append(img, label);
      li.onclick = () => openRecord(item.record_id);
      if (session.current && item.record_id === session.current.record.record_id) {
        li.classList.add('active');
      }
      return li;
    }),
  );
  el.emptyState.style.display = queue.total === 0 ? 'block' : 'none';
  el.recordPane.style.display = queue.total === 0 && !session.current ? 'none' : 'block';
}

async function openRecord(recordId: string) {
  const view = await session.open(recordId);
  drawnBox = null;
  boxMode = false;
  el.recordTitle.textContent = `${view.record.record_id} (${view.record.class_name})`;
  el.flagList.replaceChildren(
    ...view.record.flags.map((f) => {
      const li = document.createElement('li');
      li.textContent = f.metric != null ? `${f.kind}: ${f.detail} (${f.metric.toFixed(2)})` : `${f.kind}: ${f.detail}`;
      return li;
    }),
  );
  el.sourceImage.src = view.image_url;
  el.sourceImage.onload = redraw;
  redraw();
  renderQueue();
  setStatus(`review=${view.record.review}; a=accept r=reject b=draw box`);
}

async function advance() {
  const next = session.nextPendingId();
  if (next) {
    await openRecord(next);
  } else {
    session.current = null;
    renderQueue();
    setStatus('queue clear');
  }
}

async function decide(action: 'accept' | 'reject' | 'reprompt') {
  if (!session.current) return;
  const box = action === 'reprompt' && drawnBox ? clampBoxToImage(drawnBox, session.current.width, session.current.height) : undefined;
  if (action === 'reprompt' && !box) {
    setStatus('draw a box first (b, then drag)');
    return;
  }
  const outcome = await session.submit(action, box);
  if (outcome.conflict) {
    setStatus('already decided elsewhere; refreshed');
    redraw();
    renderQueue();
    return;
  }
  if (action === 'reprompt' && outcome.view) {
    drawnBox = null;
    redraw(); // show the re-segmented mask that came back
    renderQueue();
    setStatus(`re-segmented: review=${outcome.view.record.review}`);
    return;
  }
  await advance();
}

el.overlay.addEventListener('mousedown', (evt) => {
  if (!boxMode) return;
  dragStart = canvasPoint(evt);
});
el.overlay.addEventListener('mousemove', (evt) => {
  if (!boxMode || !dragStart || !session.current) return;
  const p = canvasPoint(evt);
  drawnBox = clampBoxToImage(
    boxFromDrag(dragStart.x, dragStart.y, p.x, p.y),
    session.current.width,
    session.current.height,
  );
  redraw();
});
el.overlay.addEventListener('mouseup', () => {
  dragStart = null;
});

document.addEventListener('keydown', (evt) => {
  if (evt.target instanceof HTMLInputElement) return;
  switch (evt.key) {
    case 'a':
      void decide('accept');
      break;
    case 'r':
      void decide('reject');
      break;
    case 'b':
      boxMode = !boxMode;
      setStatus(boxMode ? 'box mode: drag on the image' : 'box mode off');
      break;
    case 'Enter':
      void decide('reprompt');
      break;
    case 'n':
      void advance();
      break;
    case 'p': {
      const items = session.queue?.items ?? [];
      const at = items.findIndex((it) => it.record_id === session.current?.record.record_id);
      if (items.length) void openRecord(items[(at - 1 + items.length) % items.length].record_id);
      break;
    }
  }
});

async function boot() {
  try {
    await session.refreshQueue();
    renderQueue();
    const first = session.nextPendingId();
    if (first) await openRecord(first);
    else setStatus('queue clear');
  } catch {
    setStatus('review service unreachable; retrying in 3s');
    setTimeout(boot, 3000);
  }
}

void boot();
