"""
Дифференцируемые операции над Tensor.

Каждая функция считает прямой проход в numpy (float64) и вешает на
результат замыкание backward. Операции принимают как одиночный пример
(C×H×W, D×T, D), так и батч с ведущей размерностью B.
"""

from __future__ import annotations

import logging

import numpy as np

from nncore.tensor import Tensor, as_tensor
from utils.exceptions import (
    ContractViolation,
    DegenerateInputError,
    EmptyInputError,
    ShapeError,
)

logger = logging.getLogger(__name__)

BCE_EPS = 1e-7
NORM_EPS = 1e-12
UNIT_NORM_TOL = 1e-6


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Сворачивает градиент обратно к форме операнда после broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ============================================
# Поэлементная арифметика
# ============================================


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(g, b.shape))

    return Tensor(a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(-g, b.shape))

    return Tensor(a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a.accumulate(_unbroadcast(g * b.data, a.shape))
        b.accumulate(_unbroadcast(g * a.data, b.shape))

    return Tensor(a.data * b.data, (a, b), backward)


def total(x: Tensor) -> Tensor:
    """Сумма всех элементов (скаляр)."""

    def backward(g):
        x.accumulate(np.broadcast_to(g, x.shape))

    return Tensor(x.data.sum(), (x,), backward)


def mean(x: Tensor) -> Tensor:
    """Среднее по всем элементам (скаляр)."""
    n = x.data.size

    def backward(g):
        x.accumulate(np.broadcast_to(g / n, x.shape))

    return Tensor(x.data.mean(), (x,), backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = x.shape

    def backward(g):
        x.accumulate(g.reshape(original))

    return Tensor(x.data.reshape(shape), (x,), backward)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        for tensor, part in zip(tensors, np.split(g, bounds, axis=axis)):
            tensor.accumulate(part)

    return Tensor(
        np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward
    )


# ============================================
# Активации
# ============================================


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward(g):
        x.accumulate(g * mask)

    return Tensor(np.where(mask, x.data, 0.0), (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    # через tanh: численно устойчиво и sigmoid(0) == 0.5 ровно
    out = 0.5 * (1.0 + np.tanh(0.5 * x.data))

    def backward(g):
        x.accumulate(g * out * (1.0 - out))

    return Tensor(out, (x,), backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(g):
        x.accumulate(g * (1.0 - out**2))

    return Tensor(out, (x,), backward)


def _softmax(values: np.ndarray, axis: int) -> np.ndarray:
    shifted = np.exp(values - values.max(axis=axis, keepdims=True))
    return shifted / shifted.sum(axis=axis, keepdims=True)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    out = _softmax(x.data, axis)

    def backward(g):
        x.accumulate(out * (g - (g * out).sum(axis=axis, keepdims=True)))

    return Tensor(out, (x,), backward)


def l2_normalize(x: Tensor, axis: int = -1) -> Tensor:
    """
    Делит вектор на его евклидову норму.

    :raises DegenerateInputError: Если норма какого-либо вектора < 1e-12
    """
    norms = np.sqrt((x.data**2).sum(axis=axis, keepdims=True))
    if np.any(norms < NORM_EPS):
        logger.error("❌ l2_normalize: нулевой вектор на входе (мёртвый энкодер?)")
        raise DegenerateInputError("l2_normalize: норма вектора меньше 1e-12")
    out = x.data / norms

    def backward(g):
        x.accumulate((g - out * (g * out).sum(axis=axis, keepdims=True)) / norms)

    return Tensor(out, (x,), backward)


# ============================================
# Слои
# ============================================


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """
    Аффинное преобразование x @ W.T + b.

    :param x: (..., in)
    :param weight: (out, in)
    :param bias: (out,)
    """
    if x.shape[-1] != weight.shape[1]:
        raise ShapeError(
            f"linear: вход {x.shape} не согласован с весами {weight.shape}"
        )
    out = x.data @ weight.data.T
    if bias is not None:
        out = out + bias.data
    parents = (x, weight) if bias is None else (x, weight, bias)

    def backward(g):
        if x.requires_grad:
            x.accumulate(g @ weight.data)
        g2 = g.reshape(-1, g.shape[-1])
        x2 = x.data.reshape(-1, x.shape[-1])
        weight.accumulate(g2.T @ x2)
        if bias is not None:
            bias.accumulate(g2.sum(axis=0))

    return Tensor(out, parents, backward)


def conv2d(
    x: Tensor, weight: Tensor, bias: Tensor | None = None, padding: int = 1
) -> Tensor:
    """
    Свёртка с шагом 1 и нулевым паддингом.

    Для ядра 3x3 и padding=1 пространственный размер не меняется
    (именно так сохраняются размеры признаков в блоках энкодера).

    :param x: C_in×H×W или B×C_in×H×W
    :param weight: C_out×C_in×KH×KW
    :param bias: C_out
    """
    squeeze = x.ndim == 3
    data = x.data[None] if squeeze else x.data
    if data.ndim != 4:
        raise ShapeError(f"conv2d: ожидается вход C×H×W или B×C×H×W, получено {x.shape}")
    batch, channels, height, width = data.shape
    out_channels, in_channels, kh, kw = weight.shape
    if channels != in_channels:
        raise ShapeError(
            f"conv2d: вход имеет {channels} каналов, веса ждут {in_channels}"
        )
    out_h = height + 2 * padding - kh + 1
    out_w = width + 2 * padding - kw + 1
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"conv2d: вход {x.shape} меньше ядра {kh}x{kw}")

    padded = np.pad(data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    # накапливаем в раскладке (O, B, H, W), которую отдаёт tensordot
    acc = np.zeros((out_channels, batch, out_h, out_w))
    for i in range(kh):
        for j in range(kw):
            window = padded[:, :, i : i + out_h, j : j + out_w]
            acc += np.tensordot(weight.data[:, :, i, j], window, axes=([1], [1]))
    out = acc.transpose(1, 0, 2, 3)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    if squeeze:
        out = out[0]
    parents = (x, weight) if bias is None else (x, weight, bias)

    def backward(g):
        g4 = g[None] if squeeze else g
        g_t = g4.transpose(1, 0, 2, 3)
        grad_w = np.zeros_like(weight.data)
        grad_padded = np.zeros_like(padded)
        for i in range(kh):
            for j in range(kw):
                window = padded[:, :, i : i + out_h, j : j + out_w]
                grad_w[:, :, i, j] = np.tensordot(
                    g_t, window, axes=([1, 2, 3], [0, 2, 3])
                )
                if x.requires_grad:
                    grad_padded[:, :, i : i + out_h, j : j + out_w] += np.tensordot(
                        weight.data[:, :, i, j], g_t, axes=([0], [0])
                    ).transpose(1, 0, 2, 3)
        if x.requires_grad:
            grad_x = grad_padded[
                :, :, padding : padding + height, padding : padding + width
            ]
            x.accumulate(grad_x[0] if squeeze else grad_x)
        weight.accumulate(grad_w)
        if bias is not None:
            bias.accumulate(g4.sum(axis=(0, 2, 3)))

    return Tensor(out, parents, backward)


def maxpool2d(x: Tensor, size: int = 2) -> Tensor:
    """
    Макс-пулинг окном size×size с шагом size по двум последним осям.

    Нечётные хвостовые строки/столбцы отбрасываются (floor), поэтому
    N=350 после трёх пулингов даёт 43 кадра.
    """
    height, width = x.shape[-2:]
    if height < size or width < size:
        raise ShapeError(f"maxpool2d: вход {x.shape} меньше окна {size}x{size}")
    out_h, out_w = height // size, width // size
    lead = x.shape[:-2]
    cropped = x.data[..., : out_h * size, : out_w * size]
    blocks = (
        cropped.reshape(*lead, out_h, size, out_w, size)
        .swapaxes(-3, -2)
        .reshape(*lead, out_h, out_w, size * size)
    )
    winners = blocks.argmax(axis=-1)[..., None]
    out = np.take_along_axis(blocks, winners, axis=-1)[..., 0]

    def backward(g):
        grad_blocks = np.zeros_like(blocks)
        np.put_along_axis(grad_blocks, winners, g[..., None], axis=-1)
        grad_cropped = (
            grad_blocks.reshape(*lead, out_h, out_w, size, size)
            .swapaxes(-3, -2)
            .reshape(*lead, out_h * size, out_w * size)
        )
        grad_x = np.zeros_like(x.data)
        grad_x[..., : out_h * size, : out_w * size] = grad_cropped
        x.accumulate(grad_x)

    return Tensor(out, (x,), backward)


def _sap_scores(h: np.ndarray, w: np.ndarray, b: np.ndarray, v: np.ndarray):
    frames = np.swapaxes(h, -1, -2)
    hidden = np.tanh(frames @ w.T + b)
    return frames, hidden, hidden @ v


def _check_sap(h: Tensor, w: Tensor) -> None:
    if h.ndim not in (2, 3):
        raise ShapeError(f"sap_pool: ожидается D×T или B×D×T, получено {h.shape}")
    if h.shape[-1] == 0:
        raise EmptyInputError("sap_pool: последовательность без кадров (T = 0)")
    if h.shape[-2] != w.shape[1]:
        raise ShapeError(
            f"sap_pool: размерность кадра {h.shape[-2]} != {w.shape[1]} у W"
        )


def attention_weights(h: Tensor, w: Tensor, b: Tensor, v: Tensor) -> np.ndarray:
    """Веса внимания α (по оси времени) без построения графа."""
    _check_sap(h, w)
    _, _, scores = _sap_scores(h.data, w.data, b.data, v.data)
    return _softmax(scores, axis=-1)


def sap_pool(h: Tensor, w: Tensor, b: Tensor, v: Tensor) -> Tensor:
    """
    Self-attention pooling: Σ_t α_t h_t, α = softmax_t(v·tanh(W h_t + b)).

    :param h: D×T (или B×D×T) - выход энкодера, D = каналы × частоты
    :param w: D_a×D
    :param b: D_a
    :param v: D_a
    """
    _check_sap(h, w)
    frames, hidden, scores = _sap_scores(h.data, w.data, b.data, v.data)
    alpha = _softmax(scores, axis=-1)
    out = np.einsum("...dt,...t->...d", h.data, alpha)
    attn_dim, dim = w.shape

    def backward(g):
        g_alpha = np.einsum("...d,...dt->...t", g, h.data)
        g_scores = alpha * (g_alpha - (g_alpha * alpha).sum(axis=-1, keepdims=True))
        g_hidden = g_scores[..., None] * v.data
        g_pre = g_hidden * (1.0 - hidden**2)
        g_pre2 = g_pre.reshape(-1, attn_dim)
        v.accumulate((g_scores[..., None] * hidden).reshape(-1, attn_dim).sum(axis=0))
        w.accumulate(g_pre2.T @ frames.reshape(-1, dim))
        b.accumulate(g_pre2.sum(axis=0))
        g_h = np.einsum("...d,...t->...dt", g, alpha)
        h.accumulate(g_h + np.swapaxes(g_pre @ w.data, -1, -2))

    return Tensor(out, (h, w, b, v), backward)


# ============================================
# Функции потерь
# ============================================


def mse_loss(pred: Tensor, target) -> Tensor:
    """Среднее квадратов поэлементных разностей."""
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss: форма {pred.shape} != {target.shape}")
    diff = pred.data - target.data
    n = diff.size

    def backward(g):
        pred.accumulate(g * 2.0 * diff / n)
        target.accumulate(-g * 2.0 * diff / n)

    return Tensor(np.mean(diff**2), (pred, target), backward)


def bce_loss(p: Tensor, y) -> Tensor:
    """
    Бинарная кросс-энтропия −[y ln p + (1−y) ln(1−p)], среднее по батчу.

    p обрезается в [1e-7, 1 − 1e-7]; вне диапазона градиент нулевой.
    """
    labels = np.asarray(y, dtype=np.float64)
    if labels.shape != p.shape:
        raise ShapeError(f"bce_loss: метки {labels.shape} != вероятности {p.shape}")
    clipped = np.clip(p.data, BCE_EPS, 1.0 - BCE_EPS)
    inside = (p.data >= BCE_EPS) & (p.data <= 1.0 - BCE_EPS)
    losses = -(labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped))
    n = losses.size

    def backward(g):
        grad = -(labels / clipped - (1.0 - labels) / (1.0 - clipped)) / n
        p.accumulate(g * grad * inside)

    return Tensor(losses.mean(), (p,), backward)


def triplet_loss(
    anchor: Tensor,
    client: Tensor,
    impostor: Tensor,
    margin: float = 0.2,
    reduction: str = "mean",
) -> Tensor:
    """
    Triplet loss max(0, ‖a−c‖² − ‖a−i‖² + margin) на единичных векторах.

    :param reduction: "mean" - среднее по батчу, "none" - по каждому триплету
    :raises ContractViolation: Если норма входа отличается от 1 более чем на 1e-6
    """
    if margin < 0:
        raise ContractViolation(f"triplet_loss: отрицательный margin {margin}")
    for role, tensor in (("anchor", anchor), ("client", client), ("impostor", impostor)):
        norms = np.linalg.norm(tensor.data, axis=-1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ContractViolation(
                f"triplet_loss: {role} не нормирован (норма {norms.ravel()[0]:.6f})"
            )
    a, c, i = anchor.data, client.data, impostor.data
    hinge = ((a - c) ** 2).sum(axis=-1) - ((a - i) ** 2).sum(axis=-1) + margin
    active = hinge > 0
    losses = np.where(active, hinge, 0.0)
    n = losses.size

    def backward(g):
        scale = g * active if reduction == "none" else g * active / n
        scale = scale[..., None]
        anchor.accumulate(scale * 2.0 * (i - c))
        client.accumulate(scale * -2.0 * (a - c))
        impostor.accumulate(scale * 2.0 * (a - i))

    out = losses if reduction == "none" else losses.mean()
    return Tensor(out, (anchor, client, impostor), backward)
