(function () {
  "use strict";
  var SCHEMA_VERSION = 1;
  var SVG_NS = "http://www.w3.org/2000/svg";
  var app = document.getElementById("app");

  function el(tag, attrs, text) {
    var node = document.createElement(tag);
    for (var k in attrs || {}) node.setAttribute(k, attrs[k]);
    if (text !== undefined) node.textContent = text;
    return node;
  }
  function svg(tag, attrs) {
    var node = document.createElementNS(SVG_NS, tag);
    for (var k in attrs || {}) node.setAttribute(k, attrs[k]);
    return node;
  }
  function showError(message) {
    app.textContent = "";
    app.appendChild(el("div", { "class": "error-panel" }, message));
  }

  var data;
  try {
    data = JSON.parse(document.getElementById("visdata").textContent);
  } catch (e) {
    showError("The embedded topic data could not be parsed: " + e.message);
    return;
  }
  if (!data || data.schema_version !== SCHEMA_VERSION) {
    showError("Unsupported data schema version " + (data && data.schema_version) + "; expected " + SCHEMA_VERSION + ".");
    return;
  }

  var state = { topic: null, term: null, lambda: Math.min(1, Math.max(0, data.lambda_default)) };
  var byId = {};
  data.topics.forEach(function (t) { byId[t.id] = t; });

  // Same ordering as the core: relevance descending, ties by vocabulary ordinal.
  function rankTerms(topicId, lambda, count) {
    var scored = data.terms.map(function (e, i) {
      var lp = e.log_prob[topicId], ll = e.log_lift[topicId];
      var s = (lp === null || ll === null) ? -Infinity : lambda * lp + (1 - lambda) * ll;
      return { index: i, score: s, ordinal: e.vocab_index };
    });
    scored.sort(function (a, b) { return b.score - a.score || a.ordinal - b.ordinal; });
    return scored.slice(0, count).map(function (s) { return s.index; });
  }

  var controls = el("div", { "class": "controls" });
  var slider = el("input", { type: "range", min: "0", max: "1", step: "0.01", value: String(state.lambda), id: "lambda" });
  var sliderLabel = el("label", { "for": "lambda" }, "");
  var clear = el("button", { type: "button" }, "Clear selection");
  var status = el("div", { "class": "status" });
  controls.appendChild(sliderLabel);
  controls.appendChild(slider);
  controls.appendChild(clear);

  var layout = el("div", { "class": "layout" });
  var mapPanel = el("section", { "class": "panel" });
  var barPanel = el("section", { "class": "panel" });
  layout.appendChild(mapPanel);
  layout.appendChild(barPanel);
  app.appendChild(controls);
  app.appendChild(status);
  app.appendChild(layout);

  function renderMap() {
    mapPanel.textContent = "";
    mapPanel.appendChild(el("h2", {}, "Intertopic distance map"));
    var size = 420, pad = 60;
    var root = svg("svg", { width: size, height: size, viewBox: "0 0 " + size + " " + size, role: "img" });
    var xs = data.topics.map(function (t) { return t.x; }), ys = data.topics.map(function (t) { return t.y; });
    var span = Math.max(1e-12, Math.max.apply(null, xs.map(Math.abs).concat(ys.map(Math.abs))));
    var scale = (size / 2 - pad) / span;
    var weights = data.topics.map(function (t) { return t.proportion; });
    if (state.term !== null) {
      var cond = data.terms[state.term].conditional;
      weights = data.topics.map(function (t) { return cond[t.id]; });
    }
    var maxRadius = 55;
    data.topics.forEach(function (t, i) {
      var g = svg("g", { "class": "topic" + (state.topic === t.id ? " selected" : "") });
      var cx = data.topics.length > 1 ? size / 2 + t.x * scale : size / 2;
      var cy = data.topics.length > 1 ? size / 2 - t.y * scale : size / 2;
      var c = svg("circle", { cx: cx, cy: cy, r: maxRadius * Math.sqrt(Math.max(0, weights[i])) });
      var title = svg("title", {});
      title.textContent = "Topic " + t.display_rank + ": " + (100 * t.proportion).toFixed(1) + "% of tokens";
      c.appendChild(title);
      var label = svg("text", { x: cx, y: cy });
      label.textContent = String(t.display_rank);
      g.appendChild(c);
      g.appendChild(label);
      g.addEventListener("click", function () {
        state.topic = state.topic === t.id ? null : t.id;
        render();
      });
      root.appendChild(g);
    });
    mapPanel.appendChild(root);
  }

  function renderBars() {
    barPanel.textContent = "";
    var heading = state.topic === null ? "Most salient terms"
      : "Top terms of topic " + byId[state.topic].display_rank + " (" + (100 * byId[state.topic].proportion).toFixed(1) + "% of tokens)";
    barPanel.appendChild(el("h2", {}, heading));
    var rows = state.topic === null ? data.salient_terms : rankTerms(state.topic, state.lambda, data.top_r);
    if (!rows.length) {
      barPanel.appendChild(el("p", { "class": "placeholder" }, "no terms"));
      return;
    }
    var rowH = 16, labelW = 130, width = 460;
    var maxFreq = Math.max.apply(null, rows.map(function (i) { return data.terms[i].overall_freq; })) || 1;
    var root = svg("svg", { width: width, height: rows.length * rowH + 10, role: "img" });
    rows.forEach(function (i, r) {
      var e = data.terms[i], y = r * rowH + 4, w = width - labelW - 10;
      root.appendChild(svg("rect", { "class": "bar-overall", x: labelW, y: y, height: rowH - 3, width: w * e.overall_freq / maxFreq }));
      if (state.topic !== null)
        root.appendChild(svg("rect", { "class": "bar-topic", x: labelW, y: y, height: rowH - 3, width: w * Math.min(e.est_freq[state.topic], e.overall_freq) / maxFreq }));
      var label = svg("text", { "class": "bar-label" + (state.term === i ? " selected" : ""), x: labelW - 6, y: y + (rowH - 3) / 2 });
      label.textContent = e.term;
      label.addEventListener("click", function () { selectTerm(e.term); });
      root.appendChild(label);
    });
    barPanel.appendChild(root);
  }

  function selectTerm(term) {
    var index = -1;
    data.terms.forEach(function (e, i) { if (e.term === term) index = i; });
    if (index < 0) { status.textContent = "Unknown term: " + term; return; }
    state.term = state.term === index ? null : index;
    status.textContent = state.term === null ? "" : "Circle sizes show P(topic | “" + term + "”).";
    render();
  }

  function render() {
    sliderLabel.textContent = "Relevance λ = " + state.lambda.toFixed(2);
    renderMap();
    renderBars();
  }

  slider.addEventListener("input", function () {
    state.lambda = Math.min(1, Math.max(0, parseFloat(slider.value)));
    render();
  });
  clear.addEventListener("click", function () {
    state.topic = null;
    state.term = null;
    status.textContent = "";
    render();
  });
  render();
})();
