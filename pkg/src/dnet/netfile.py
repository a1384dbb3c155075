"""Self-describing net files and the verification engine over them.

A net file is a single JSON document holding the ambient signature,
grid dimensions, frame vectors, named vertex / edge / 1-form fields and
generator metadata.  Floats are serialized with Python's shortest
round-trip decimal representation, so save / load is lossless bit for
bit; infinite edge labels are encoded as the strings "inf" / "-inf".
Writes go through a temporary file and an atomic rename.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, GeometryError
from .grid import Grid
from .pseudo_euclidean import Frame, Signature
from .reports import Check, Report

FORMAT = "dnet-net/1"
FLOAT_ENCODING = "decimal-shortest-roundtrip"

VERTEX_FIELDS = ("mu", "mu_plus", "mu_minus", "x", "n", "xdual", "ndual",
                 "xi", "y", "t")
EDGE_FIELDS = ("m", "kappa")
FORM1_FIELDS = ("eta",)


def _encode_array(arr) -> list:
    def enc(v):
        if isinstance(v, (list, tuple, np.ndarray)):
            return [enc(w) for w in v]
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return enc(np.asarray(arr, float).tolist())


def _decode_array(data) -> np.ndarray:
    def dec(v):
        if isinstance(v, list):
            return [dec(w) for w in v]
        if isinstance(v, str):
            return float(v)
        return float(v)
    return np.asarray(dec(data), float)


@dataclass
class NetFile:
    """In-memory image of a net file."""

    signature: tuple
    dims: tuple
    stacked: bool = False
    frame: dict = field(default_factory=dict)
    vertex_fields: dict = field(default_factory=dict)
    edge_fields: dict = field(default_factory=dict)
    form1_fields: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def grid(self) -> Grid:
        return Grid(self.dims, stacked=self.stacked)

    def sig(self) -> Signature:
        return Signature(*self.signature)

    def lie_frame(self):
        from .lie_sphere import LieFrame
        fr = self.the_frame()
        if fr is None or fr.p is None:
            return None
        basis3 = self.frame.get("basis3")
        if basis3 is None:
            return None
        return LieFrame(fr, _decode_array(basis3))

    def the_frame(self) -> Frame | None:
        if not self.frame:
            return None
        p = self.frame.get("p")
        return Frame(self.sig(), _decode_array(self.frame["o"]),
                     _decode_array(self.frame["q"]),
                     None if p is None else _decode_array(p))

    def to_document(self) -> dict:
        doc = {
            "format": FORMAT,
            "float_encoding": FLOAT_ENCODING,
            "signature": list(self.signature),
            "dims": list(self.dims),
            "stacked": self.stacked,
            "frame": {k: (_encode_array(v) if k != "p" or v is not None else None)
                      for k, v in self.frame.items()},
            "fields": {
                "vertex": {k: _encode_array(v) for k, v in self.vertex_fields.items()},
                "edge": {k: _encode_array(v) for k, v in self.edge_fields.items()},
                "form1": {k: _encode_array(v) for k, v in self.form1_fields.items()},
            },
            "metadata": self.metadata,
        }
        return doc

    def save(self, path: str):
        doc = self.to_document()
        text = json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1)
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str, validate: bool = True) -> "NetFile":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != FORMAT:
            raise FormatError(f"unsupported format {doc.get('format')!r}")
        fields = doc.get("fields", {})
        nf = cls(
            signature=tuple(doc["signature"]),
            dims=tuple(doc["dims"]),
            stacked=bool(doc.get("stacked", False)),
            frame={k: v for k, v in doc.get("frame", {}).items()},
            vertex_fields={k: _decode_array(v)
                           for k, v in fields.get("vertex", {}).items()},
            edge_fields={k: _decode_array(v)
                         for k, v in fields.get("edge", {}).items()},
            form1_fields={k: _decode_array(v)
                          for k, v in fields.get("form1", {}).items()},
            metadata=doc.get("metadata", {}),
        )
        if validate:
            nf.check_shapes()
        return nf

    def check_shapes(self):
        g = self.grid()
        for name, arr in self.vertex_fields.items():
            if len(arr) != g.nverts:
                raise FormatError(f"vertex field {name!r} has {len(arr)} rows, "
                                  f"expected {g.nverts}")
        for name, arr in self.edge_fields.items():
            if len(arr) != g.nedges:
                raise FormatError(f"edge field {name!r} has {len(arr)} rows, "
                                  f"expected {g.nedges}")
        for name, arr in self.form1_fields.items():
            if len(arr) != g.nedges:
                raise FormatError(f"one-form field {name!r} has {len(arr)} rows, "
                                  f"expected {g.nedges}")


DEFAULT_TOLS = {
    "nullity": 1e-10,
    "moutard": 1e-10,
    "label_relations": 1e-9,
    "flatness": 1e-9,
    "eta_closed": 1e-10,
    "applicability": 1e-8,
    "gauge": 1e-8,
    "duality": 1e-9,
    "eisenhart": 1e-8,
    "associate": 1e-8,
    "unit_normal": 1e-9,
    "curvature_relation": 1e-9,
    "circularity": 1e-8,
    "orthogonality": 1e-8,
    "coefficients": 1e-9,
    "regularity_margin": 1e-6,
}


def run_checks(nf: NetFile, tols: dict | None = None) -> Report:
    """Run every check the present fields support; list the rest as
    skipped."""
    from .isothermic import IsothermicNet, connection_flatness
    from .lie_sphere import (OmegaNet, PrincipalNet, associates, check_guichard,
                             check_omega, eisenhart_general, eisenhart_guichard,
                             omega_edge_labels)

    tols = {**DEFAULT_TOLS, **(tols or {})}
    rep = Report()
    g = nf.grid()
    sig = nf.sig()
    vf = nf.vertex_fields

    net = None
    if "mu" in vf:
        net = IsothermicNet(g, sig, vf["mu"])
        v = net.validate()
        rep.add(Check.from_residual("isothermic.nullity", v["nullity"],
                                    tols["nullity"]))
        rep.add(Check.from_residual("isothermic.moutard", v["moutard"],
                                    tols["moutard"], worst=v["worst_quad"]))
        rep.add(Check.from_residual("isothermic.label_relations",
                                    v["label_relations"], tols["label_relations"]))
        rep.add(Check.from_margin("isothermic.diagonal_margin",
                                  v["diagonal_margin"], tols["regularity_margin"]))
        finite = net.finite_labels()
        for t in (-1.0, 0.3, 2.0):
            if finite.size and np.min(np.abs(finite - t)) < 1e-6:
                rep.skip(f"isothermic.flatness(t={t})", "t collides with a label")
                continue
            try:
                res = connection_flatness(net, t)
            except (GeometryError, ValueError) as err:
                rep.add(Check(name=f"isothermic.flatness(t={t})",
                              residual=float("inf"), tol=tols["flatness"],
                              passed=False, note=f"aborted: {err}"))
                continue
            rep.add(Check.from_residual(f"isothermic.flatness(t={t})", res,
                                        tols["flatness"]))
        if "m" in nf.edge_fields:
            stored = nf.edge_fields["m"]
            both_inf = np.isinf(stored) & np.isinf(net.labels)
            num = np.where(both_inf, 0.0, np.abs(stored - net.labels))
            den = np.where(both_inf, 1.0, np.maximum(np.abs(stored), 1e-300))
            rep.add(Check.from_residual("isothermic.stored_labels",
                                        float((num / den).max(initial=0.0)), 1e-9))
    else:
        rep.skip("isothermic.*", "no mu field")

    lf = nf.lie_frame()
    omega = None
    if {"mu_plus", "mu_minus", "y", "t"} <= set(vf) and "eta" in nf.form1_fields \
            and lf is not None:
        omega = OmegaNet(g, lf, vf["y"], vf["t"], nf.form1_fields["eta"],
                         mu_plus=vf["mu_plus"], mu_minus=vf["mu_minus"])
        v = omega.validate(tol=tols["applicability"],
                           margin=tols["regularity_margin"])
        rep.add(Check.from_residual("omega.null_planes", v["null_planes"], 1e-9))
        rep.add(Check.from_residual("omega.normalization", v["normalization"], 1e-9))
        rep.add(Check.from_residual("omega.gauge", v["gauge"], tols["gauge"]))
        app = v["applicability"]
        rep.add(Check.from_residual("omega.eta_closed", app["eta_closed"],
                                    tols["eta_closed"]))
        rep.add(Check.from_residual("omega.eta_decomposable",
                                    app["eta_decomposable"], tols["applicability"]))
        rep.add(Check.from_residual("omega.eta_in_lam2_f", app["eta_in_lam2_f"],
                                    tols["applicability"]))
        rep.add(Check.from_margin("omega.nondegeneracy",
                                  app["nondegeneracy_margin"],
                                  tols["regularity_margin"]))
        a = associates(omega)
        rep.add(Check.from_residual("omega.reconstruction", a.reconstruction,
                                    tols["applicability"]))
        rep.add(Check.from_residual("omega.duality", a.duality, tols["duality"]))
        labels = omega_edge_labels(omega)
        pn = omega.principal()
        rep.add(Check.from_residual(
            "omega.eisenhart",
            eisenhart_general(pn, a.x_dual, a.n_dual, labels)["pairing"],
            tols["eisenhart"]))
    elif "mu_plus" in vf:
        rep.skip("omega.*", "incomplete omega fields or frame")
    else:
        rep.skip("omega.*", "no congruence fields")

    if {"x", "n"} <= set(vf) and vf["x"].shape[1] == 3 and vf["n"].shape[1] == 3:
        pn = PrincipalNet(g, vf["x"], vf["n"])
        v = pn.validate()
        rep.add(Check.from_residual("principal.unit_normal", v["unit_normal"],
                                    tols["unit_normal"]))
        rep.add(Check.from_residual("principal.curvature_relation",
                                    v["curvature_relation"],
                                    tols["curvature_relation"]))
        rep.add(Check.from_residual("principal.circularity", v["circularity"],
                                    tols["circularity"]))
        if "xdual" in vf and "ndual" not in vf:
            # an associate net without a separate associate Gauss map is
            # the Guichard case (the Gauss map itself is the partner)
            rep.add(Check.from_residual(
                "guichard.associate",
                check_guichard(pn, vf["xdual"])["associate"], tols["associate"]))
            if omega is not None:
                labels = omega_edge_labels(omega)
                eis = eisenhart_guichard(pn, vf["xdual"], labels)
                rep.add(Check.from_residual("guichard.eisenhart",
                                            eis["eisenhart"], tols["eisenhart"]))
                rep.add(Check.from_residual("guichard.ratio_identity",
                                            eis["ratio_identity"],
                                            10 * tols["eisenhart"]))
        elif "xdual" not in vf:
            rep.skip("guichard.*", "no xdual field")
        if {"xdual", "ndual"} <= set(vf):
            co = check_omega(pn, vf["xdual"], vf["ndual"], tol=tols["duality"])
            rep.add(Check.from_residual("omega.duality_fields", co["duality"],
                                        tols["duality"]))
    else:
        rep.skip("principal.*", "no x, n fields")

    if "xi" in vf and net is not None and lf is not None:
        ip = sig.inner
        xi = vf["xi"]
        orth = np.abs(ip(xi, net.mu)) / np.maximum(
            np.linalg.norm(xi, axis=1) * np.linalg.norm(net.mu, axis=1), 1e-300)
        rep.add(Check.from_residual("special.orthogonality",
                                    float(orth.max(initial=0.0)),
                                    tols["orthogonality"]))
        coeffs = np.stack([ip(lf.p, lf.p) * np.ones(g.nverts),
                           2.0 * ip(lf.p, xi), ip(xi, xi)], axis=1)
        dev = float(np.abs(coeffs - np.array([-1.0, -2.0, 0.0])).max(initial=0.0))
        rep.add(Check.from_residual("special.coefficients", dev,
                                    tols["coefficients"]))
    elif "xi" in vf:
        rep.skip("special.*", "xi present but mu or frame missing")

    return rep
