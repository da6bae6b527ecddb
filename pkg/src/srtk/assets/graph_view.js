/* Self-contained subgraph viewer: force layout, drag, pan, zoom.
 * Reads the global GRAPH object ({nodes: [{id,label,highlighted}],
 * edges: [{source,target,label}]}) and renders into the #graph svg.
 * No external resources, no randomness.
 */
(function () {
  "use strict";

  var svg = document.getElementById("graph");
  var W = 900, H = 600;
  var view = { x: 0, y: 0, w: W, h: H };

  var nodes = GRAPH.nodes.map(function (n, i) {
    var angle = (2 * Math.PI * i) / Math.max(GRAPH.nodes.length, 1);
    var radius = Math.min(W, H) / 3;
    return {
      id: n.id, label: n.label, highlighted: n.highlighted,
      x: W / 2 + radius * Math.cos(angle),
      y: H / 2 + radius * Math.sin(angle),
      vx: 0, vy: 0, fixed: false
    };
  });
  var byId = {};
  nodes.forEach(function (n) { byId[n.id] = n; });
  var edges = GRAPH.edges.map(function (e) {
    return { source: byId[e.source], target: byId[e.target], label: e.label };
  });

  function tick() {
    var i, j, a, b, dx, dy, d2, d, f;
    for (i = 0; i < nodes.length; i++) {
      for (j = i + 1; j < nodes.length; j++) {
        a = nodes[i]; b = nodes[j];
        dx = b.x - a.x; dy = b.y - a.y;
        d2 = dx * dx + dy * dy + 0.01;
        f = 6000 / d2;
        d = Math.sqrt(d2);
        a.vx -= (dx / d) * f; a.vy -= (dy / d) * f;
        b.vx += (dx / d) * f; b.vy += (dy / d) * f;
      }
    }
    edges.forEach(function (e) {
      var dx = e.target.x - e.source.x, dy = e.target.y - e.source.y;
      var d = Math.sqrt(dx * dx + dy * dy) + 0.01;
      var f = (d - 140) * 0.02;
      e.source.vx += (dx / d) * f; e.source.vy += (dy / d) * f;
      e.target.vx -= (dx / d) * f; e.target.vy -= (dy / d) * f;
    });
    nodes.forEach(function (n) {
      n.vx += (W / 2 - n.x) * 0.002; n.vy += (H / 2 - n.y) * 0.002;
      if (!n.fixed) { n.x += n.vx * 0.5; n.y += n.vy * 0.5; }
      n.vx *= 0.6; n.vy *= 0.6;
    });
  }

  var NS = "http://www.w3.org/2000/svg";
  function el(name, attrs, parent) {
    var node = document.createElementNS(NS, name);
    Object.keys(attrs).forEach(function (k) { node.setAttribute(k, attrs[k]); });
    (parent || svg).appendChild(node);
    return node;
  }

  var defs = el("defs", {});
  var marker = el("marker", {
    id: "arrow", viewBox: "0 0 10 10", refX: 22, refY: 5,
    markerWidth: 7, markerHeight: 7, orient: "auto-start-reverse"
  }, defs);
  el("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#8a8f98" }, marker);

  var edgeLayer = el("g", { "class": "edges" });
  var nodeLayer = el("g", { "class": "nodes" });

  var edgeViews = edges.map(function (e) {
    var line = el("line", { stroke: "#8a8f98", "stroke-width": 1.5, "marker-end": "url(#arrow)" }, edgeLayer);
    var text = el("text", { "class": "edge-label", "text-anchor": "middle" }, edgeLayer);
    text.textContent = e.label;
    return { edge: e, line: line, text: text };
  });

  var nodeViews = nodes.map(function (n) {
    var g = el("g", { "class": "node" + (n.highlighted ? " highlighted" : "") }, nodeLayer);
    el("circle", { r: 16 }, g);
    var text = el("text", { dy: 30, "text-anchor": "middle" }, g);
    text.textContent = n.label;
    g.addEventListener("pointerdown", function (ev) { startDrag(n, ev); });
    return { node: n, g: g };
  });

  function render() {
    edgeViews.forEach(function (v) {
      v.line.setAttribute("x1", v.edge.source.x);
      v.line.setAttribute("y1", v.edge.source.y);
      v.line.setAttribute("x2", v.edge.target.x);
      v.line.setAttribute("y2", v.edge.target.y);
      v.text.setAttribute("x", (v.edge.source.x + v.edge.target.x) / 2);
      v.text.setAttribute("y", (v.edge.source.y + v.edge.target.y) / 2 - 6);
    });
    nodeViews.forEach(function (v) {
      v.g.setAttribute("transform", "translate(" + v.node.x + "," + v.node.y + ")");
    });
    svg.setAttribute("viewBox", view.x + " " + view.y + " " + view.w + " " + view.h);
  }

  var steps = 0;
  function loop() {
    tick(); render();
    if (++steps < 300) { requestAnimationFrame(loop); }
  }

  var dragging = null;
  function toGraph(ev) {
    var rect = svg.getBoundingClientRect();
    return {
      x: view.x + ((ev.clientX - rect.left) / rect.width) * view.w,
      y: view.y + ((ev.clientY - rect.top) / rect.height) * view.h
    };
  }
  function startDrag(node, ev) {
    dragging = node; node.fixed = true; steps = 0;
    ev.stopPropagation();
    requestAnimationFrame(loop);
  }
  svg.addEventListener("pointermove", function (ev) {
    if (dragging) {
      var p = toGraph(ev);
      dragging.x = p.x; dragging.y = p.y;
      steps = 0; render();
    } else if (panning) {
      var q = toGraph(ev);
      view.x += panStart.x - q.x; view.y += panStart.y - q.y;
      render();
    }
  });
  svg.addEventListener("pointerup", function () {
    if (dragging) { dragging.fixed = false; }
    dragging = null; panning = false;
  });

  var panning = false, panStart = null;
  svg.addEventListener("pointerdown", function (ev) {
    panning = true; panStart = toGraph(ev);
  });
  svg.addEventListener("wheel", function (ev) {
    ev.preventDefault();
    var factor = ev.deltaY > 0 ? 1.15 : 1 / 1.15;
    var p = toGraph(ev);
    view.x = p.x - (p.x - view.x) * factor;
    view.y = p.y - (p.y - view.y) * factor;
    view.w *= factor; view.h *= factor;
    render();
  }, { passive: false });

  render();
  requestAnimationFrame(loop);
})();
