import init, {
  checkClaim, rerankExplain, linguisticProfile, retrievalModels, exampleClaims,
} from "./pkg/factcheck_wasm.js";

const $ = (id) => document.getElementById(id);

function el(tag, attrs = {}, ...children) {
  const e = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") e.className = v;
    else if (k === "style") e.style.cssText = v;
    else e.setAttribute(k, v);
  }
  for (const c of children) e.append(c instanceof Node ? c : String(c));
  return e;
}

function fail(out, err) {
  out.replaceChildren(el("p", { class: "error" }, err.message ?? String(err)));
}

const fmt = (x) => Number(x).toFixed(3);
const bar = (x, scale = 120) => el("span", { class: "bar", style: `width:${Math.round(x * scale)}px` });

function stanceTable(dist) {
  const rows = [["agree", dist.p_related * dist.p_agree], ["disagree", dist.p_related * dist.p_disagree],
    ["discuss", dist.p_related * dist.p_discuss], ["unrelated", 1 - dist.p_related]];
  return el("table", {}, ...rows.map(([name, p]) => el("tr", {}, el("td", {}, name), el("td", {}, fmt(p)), el("td", {}, bar(p)))));
}

function highlighted(doc) {
  const p = el("p");
  let at = 0;
  const spans = [...doc.rationales].sort((a, b) => a.start - b.start);
  const enc = new TextEncoder();
  const dec = new TextDecoder();
  const bytes = enc.encode(doc.text);
  for (const r of spans) {
    if (r.start < at || r.dominant === "unrelated") continue;
    p.append(dec.decode(bytes.slice(at, r.start)));
    p.append(el("mark", { class: r.dominant, title: `${r.dominant}, related ${fmt(r.dist.p_related)}` }, dec.decode(bytes.slice(r.start, r.end))));
    at = r.end;
  }
  p.append(dec.decode(bytes.slice(at)));
  return p;
}

function renderCheck(result) {
  const v = result.verdict;
  const out = [
    el("p", {}, el("span", { class: `verdict ${v.label}` }, v.label), " ",
      `agree ${fmt(v.agree_score)}, disagree ${fmt(v.disagree_score)}, discuss ${fmt(v.discuss_score)}; `,
      `top score ${fmt(v.top_score)} on ${v.basis_channel}`),
    el("p", {}, "query: ", el("code", {}, result.query.terms.join(" ") || "(empty)")),
  ];
  for (const d of result.diagnostics ?? []) out.push(el("p", { class: "error" }, d));
  for (const ch of result.channels) {
    const head = ch.status === "ok"
      ? `${ch.channel}: ${ch.documents.length} documents, ${ch.relaxations} relaxations`
      : `${ch.channel}: failed (${ch.error})`;
    out.push(el("h3", {}, head));
    for (const d of ch.documents) {
      const score = d.f_rank != null ? `${fmt(d.score_init)} / ${fmt(d.f_rank)}` : fmt(d.score_init);
      out.push(el("details", {},
        el("summary", {}, `${d.rank}. ${d.title} [${d.dominant}] ${score} `, el("small", {}, d.source_domain)),
        stanceTable(d.stance),
        highlighted(d)));
    }
  }
  return out;
}

function runCheck() {
  const out = $("check-out");
  const options = {
    k: Number($("k").value),
    model: $("model").value,
    rerank: $("rerank").checked,
    nei_threshold: Number($("tau").value),
    label_mode: $("twolabel").checked ? "2lbl" : "3lbl",
  };
  try {
    out.replaceChildren(...renderCheck(JSON.parse(checkClaim($("claim").value, JSON.stringify(options)))));
  } catch (e) {
    fail(out, e);
  }
}

function tokens(list, matched) {
  return el("div", {}, ...list.map((t) => {
    const cls = t.keyword ? (matched.has(t.text.toLowerCase()) ? "match" : "kw") : "";
    return el("span", { class: `tok ${cls}` }, t.text, el("small", {}, t.pos));
  }));
}

function runRerank() {
  const out = $("rr-out");
  try {
    const v = JSON.parse(rerankExplain($("rr-claim").value, $("rr-title").value, Number($("rr-score").value), $("rr-mode").value));
    const titleWords = new Set(v.title_keywords.filter((t) => t.keyword).map((t) => t.text.toLowerCase()));
    const claimWords = new Set(v.claim_keywords.filter((t) => t.keyword).map((t) => t.text.toLowerCase()));
    const c = v.counts;
    out.replaceChildren(
      tokens(v.claim_keywords, titleWords),
      tokens(v.title_keywords, claimWords),
      el("p", {}, `match ${c.matched}, claim ${c.claim}, title ${c.title}: `,
        el("code", {}, `(${c.matched}/${c.claim}) x (${c.matched}/${c.title}) x ${v.score_init} = ${fmt(v.f_rank)}`)),
    );
  } catch (e) {
    fail(out, e);
  }
}

function runProfile() {
  const out = $("lp-out");
  try {
    const v = JSON.parse(linguisticProfile($("lp-text").value, 15));
    const scores = Object.entries(v.profile.scores);
    const table = el("table", {}, ...scores.map(([name, s]) =>
      el("tr", {}, el("td", {}, name), el("td", {}, fmt(s)), el("td", {}, bar(s, 400)))));
    const clouds = v.word_clouds.map((w) => {
      const max = Math.max(1, ...w.entries.map(([, n]) => n));
      return el("div", { class: "cloud" }, el("strong", {}, `${w.lexicon}: `),
        ...(w.entries.length ? w.entries.map(([cue, n]) => el("span", { style: `font-size:${0.9 + n / max}em` }, cue)) : ["(none)"]));
    });
    out.replaceChildren(el("p", {}, `${v.profile.doc_token_count} words`), table, ...clouds);
  } catch (e) {
    fail(out, e);
  }
}

await init();
for (const m of JSON.parse(retrievalModels())) $("model").append(el("option", {}, m));
$("model").value = "dfr_z";
const examples = JSON.parse(exampleClaims());
for (const c of examples) $("examples").append(el("option", { value: c }));
$("claim").value = examples[0];

$("check").addEventListener("click", runCheck);
$("claim").addEventListener("keydown", (e) => { if (e.key === "Enter") runCheck(); });
for (const id of ["rr-claim", "rr-title", "rr-score", "rr-mode"]) $(id).addEventListener("input", runRerank);
$("lp-text").addEventListener("input", runProfile);

$("status").textContent = "Everything runs in the browser over the bundled demo corpus.";
runCheck();
runRerank();
runProfile();
