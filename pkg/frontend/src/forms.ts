// Post-block questionnaire and end-of-session ranking widgets.

import { ENCODINGS, isEncodingPermutation } from "./protocol.js";

// Thirteen 7-point items per block: three on the virtual/physical balance,
// four on the spatial model formed, six on attention and workload.
export const QUESTIONNAIRE_ITEMS: { id: string; text: string }[] = [
  { id: "q01", text: "I could keep track of where the virtual hazards were." },
  { id: "q02", text: "I could keep track of the physical room around me." },
  { id: "q03", text: "The mix of virtual overlay and real room felt right." },
  { id: "q04", text: "I formed a clear layout of the room in my head." },
  { id: "q05", text: "I knew where things were relative to me at all times." },
  { id: "q06", text: "I could judge the size of the space confidently." },
  { id: "q07", text: "I can still picture the room layout now." },
  { id: "q08", text: "How complex did the situation feel? (1 simple, 7 complex)" },
  { id: "q09", text: "How alert did you feel during the trials? (1 low, 7 high)" },
  { id: "q10", text: "How hard were you concentrating? (1 one thing, 7 many things)" },
  { id: "q11", text: "How divided was your attention? (1 focused, 7 split)" },
  { id: "q12", text: "How much mental capacity was left over? (1 none, 7 plenty)" },
  { id: "q13", text: "How much did you learn about the situation? (1 little, 7 a lot)" },
];

export const SCALE_MIN = 1;
export const SCALE_MAX = 7;

export function validateAnswers(answers: Record<string, number>): string | null {
  if (Object.keys(answers).length !== QUESTIONNAIRE_ITEMS.length) {
    return `need ${QUESTIONNAIRE_ITEMS.length} answers`;
  }
  for (const item of QUESTIONNAIRE_ITEMS) {
    const v = answers[item.id];
    if (!Number.isInteger(v) || v < SCALE_MIN || v > SCALE_MAX) {
      return `answer ${item.id} must be an integer in [${SCALE_MIN}, ${SCALE_MAX}]`;
    }
  }
  return null;
}

export function buildQuestionnaireForm(
  root: HTMLElement,
  block: number,
  onSubmit: (answers: Record<string, number>) => void,
): void {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = `Block ${block} questionnaire`;
  root.appendChild(heading);
  const rows = new Map<string, HTMLInputElement>();
  for (const item of QUESTIONNAIRE_ITEMS) {
    const row = document.createElement("div");
    row.className = "q-row";
    const label = document.createElement("label");
    label.textContent = item.text;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(SCALE_MIN);
    input.max = String(SCALE_MAX);
    input.step = "1";
    input.value = "4";
    const value = document.createElement("span");
    value.textContent = input.value;
    input.addEventListener("input", () => (value.textContent = input.value));
    row.append(label, input, value);
    root.appendChild(row);
    rows.set(item.id, input);
  }
  const submit = document.createElement("button");
  submit.textContent = "Submit answers";
  submit.addEventListener("click", () => {
    const answers: Record<string, number> = {};
    rows.forEach((input, id) => (answers[id] = parseInt(input.value, 10)));
    const problem = validateAnswers(answers);
    if (problem) {
      alert(problem);
      return;
    }
    onSubmit(answers);
  });
  root.appendChild(submit);
}

/** Drag-to-order ranking of the six encodings, best first. */
export function buildRankingForm(
  root: HTMLElement,
  onSubmit: (order: string[], freeText: string) => void,
): void {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = "Rank the visualizations (best first)";
  root.appendChild(heading);
  const list = document.createElement("ul");
  list.className = "rank-list";
  const order: string[] = [...ENCODINGS];

  function redraw() {
    list.innerHTML = "";
    order.forEach((name, i) => {
      const li = document.createElement("li");
      li.draggable = true;
      li.textContent = `${i + 1}. ${name}`;
      li.addEventListener("dragstart", (ev) => {
        ev.dataTransfer?.setData("text/plain", String(i));
      });
      li.addEventListener("dragover", (ev) => ev.preventDefault());
      li.addEventListener("drop", (ev) => {
        ev.preventDefault();
        const from = parseInt(ev.dataTransfer?.getData("text/plain") ?? "", 10);
        if (Number.isInteger(from)) {
          const [moved] = order.splice(from, 1);
          order.splice(i, 0, moved);
          redraw();
        }
      });
      const up = document.createElement("button");
      up.textContent = "↑";
      up.disabled = i === 0;
      up.addEventListener("click", () => {
        [order[i - 1], order[i]] = [order[i], order[i - 1]];
        redraw();
      });
      li.appendChild(up);
      list.appendChild(li);
    });
  }
  redraw();
  root.appendChild(list);

  const freeText = document.createElement("textarea");
  freeText.placeholder = "Why this order? (optional)";
  root.appendChild(freeText);

  const submit = document.createElement("button");
  submit.textContent = "Submit ranking";
  submit.addEventListener("click", () => {
    if (!isEncodingPermutation(order)) {
      alert("ranking must order each encoding exactly once");
      return;
    }
    onSubmit([...order], freeText.value);
  });
  root.appendChild(submit);
}
