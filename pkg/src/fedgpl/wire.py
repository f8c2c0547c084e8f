"""Binary codec for split-protocol messages.

Frame = 16-byte header (magic, version, kind, client id, round, payload
length) followed by a little-endian payload. Graph payloads carry two
32-bit counts, the edge list as 32-bit index pairs, then the feature
matrix; every other kind is a flat float32 array. Feature width is
recovered from the byte budget, so it is not stored.
"""

import struct

import numpy as np

from .errors import BadMagic, DecodeError, TruncatedPayload, UnknownKind

MAGIC = b"FGPL"
VERSION = 1
HEADER = struct.Struct("<4sBBHII")

KINDS = (
    "PromptedGraph",
    "Embedding",
    "EmbeddingGrad",
    "FeatureGrad",
    "ParamUpload",
    "ParamUpdate",
)
_CODE = {name: i + 1 for i, name in enumerate(KINDS)}
_NAME = {code: name for name, code in _CODE.items()}


def _graph_payload(edges, features):
    edges = np.ascontiguousarray(edges, dtype="<u4").reshape(-1, 2)
    features = np.ascontiguousarray(features, dtype="<f4")
    n = features.shape[0] if features.ndim == 2 else 0
    counts = struct.pack("<II", n, edges.shape[0])
    return counts + edges.tobytes() + features.tobytes()


def _parse_graph_payload(raw):
    if len(raw) < 8:
        raise TruncatedPayload("graph payload shorter than its counts")
    n, e = struct.unpack_from("<II", raw)
    need = 8 + 8 * e
    if len(raw) < need:
        raise TruncatedPayload("graph payload shorter than its edge list")
    edges = np.frombuffer(raw, dtype="<u4", count=2 * e, offset=8).reshape(e, 2)
    feat_bytes = len(raw) - need
    if n == 0:
        if feat_bytes:
            raise DecodeError("features present on an empty graph")
        return edges.astype(np.int64), np.zeros((0, 0))
    if feat_bytes % (4 * n):
        raise DecodeError("feature bytes not a multiple of the node count")
    d = feat_bytes // (4 * n)
    features = np.frombuffer(raw, dtype="<f4", count=n * d, offset=need)
    return edges.astype(np.int64), features.astype(np.float64).reshape(n, d)


def encode_message(kind, client_id, round_no, payload):
    """Serialize one message; `payload` is (edges, features) for graphs,
    otherwise any array (flattened on the wire)."""
    if kind not in _CODE:
        raise UnknownKind(f"cannot encode kind {kind!r}")
    if kind == "PromptedGraph":
        body = _graph_payload(*payload)
    else:
        body = np.ascontiguousarray(payload, dtype="<f4").tobytes()
    header = HEADER.pack(MAGIC, VERSION, _CODE[kind], client_id, round_no, len(body))
    return header + body


def decode_message(data):
    """Inverse of encode_message: (kind, client_id, round, payload).

    Flat-array kinds come back as 1-D float64; the caller restores shape
    from protocol context.
    """
    if len(data) < HEADER.size:
        raise TruncatedPayload("buffer shorter than the fixed header")
    magic, version, code, client_id, round_no, length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version}")
    if code not in _NAME:
        raise UnknownKind(f"unknown kind code {code}")
    if len(data) < HEADER.size + length:
        raise TruncatedPayload("payload shorter than the declared length")
    if len(data) > HEADER.size + length:
        raise DecodeError("trailing bytes after the declared payload")
    raw = data[HEADER.size:]
    kind = _NAME[code]
    if kind == "PromptedGraph":
        payload = _parse_graph_payload(raw)
    else:
        if length % 4:
            raise DecodeError("array payload not a multiple of 4 bytes")
        payload = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    return kind, client_id, round_no, payload
