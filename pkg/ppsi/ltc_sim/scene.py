"""Synthetic light-transport scenes.

Each camera pixel owns a pixel transport image (PTI): a direct Gaussian lobe
at its true projector correspondence, optional global-illumination speckles
and an optional isotropic low-pass spread standing in for subsurface
scattering. Lobes are isotropic Gaussians truncated at 4 sigma.

Scenes are built from a YAML description (surface generator + speckle
generators + explicit lobes) or assembled directly in code.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml
from scipy import sparse
from scipy.ndimage import gaussian_filter

from ..geometry.rig import DeviceSpec, StereoRig

logger = logging.getLogger(__name__)

TRUNCATE_SIGMAS = 4.0

Pixel = Tuple[int, int]


@dataclass(frozen=True)
class Lobe:
    """Gaussian lobe in the projector plane. radius is the standard deviation in pixels."""
    center: Tuple[float, float]
    amplitude: float
    radius: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"Lobe amplitude must be >= 0, got {self.amplitude}")
        if self.radius <= 0:
            raise ValueError(f"Lobe radius must be > 0, got {self.radius}")

    def to_dict(self) -> Dict[str, Any]:
        return {"center": list(self.center), "amplitude": self.amplitude, "radius": self.radius}


@dataclass
class PixelTransport:
    """Lobes of one camera pixel. truth is the 3D surface point behind the direct lobe, if any."""
    direct: Optional[Lobe] = None
    speckles: List[Lobe] = field(default_factory=list)
    truth: Optional[Tuple[float, float, float]] = None

    @property
    def lobes(self) -> List[Lobe]:
        return ([self.direct] if self.direct is not None else []) + list(self.speckles)


@dataclass
class SceneModel:
    """
    Attributes:
        device: Projector and camera rasters
        transports: camera pixel (u, v) -> lobes; absent pixels see nothing
        subsurface_width: sigma of the low-pass spread in projector pixels (0 = off)
        ambient: O(u, v), scalar or (camera_rows, camera_cols)
        noise_sigma: additive Gaussian noise on rendered intensities
        rig: Optional stereo rig the scene was generated with
        scene_id: Free-form identifier carried into reports
        surface: Generator description (type plane | sphere) used by the shape metrics
    """
    device: DeviceSpec
    transports: Dict[Pixel, PixelTransport] = field(default_factory=dict)
    subsurface_width: float = 0.0
    ambient: Union[float, np.ndarray] = 0.0
    noise_sigma: float = 0.0
    rig: Optional[StereoRig] = None
    scene_id: str = "scene"
    seed: int = 0
    surface: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        if self.subsurface_width < 0:
            raise ValueError("Subsurface width must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("Noise sigma must be >= 0")
        ambient = np.broadcast_to(
            np.asarray(self.ambient, dtype=np.float64),
            (self.device.camera_rows, self.device.camera_cols),
        )
        if np.any(ambient < 0):
            raise ValueError("Ambient level must be >= 0")
        self.ambient = np.array(ambient)

    def pixel_index(self, camera_pixel: Pixel) -> int:
        u, v = camera_pixel
        return v * self.device.camera_cols + u

    def pixel_of(self, index: int) -> Pixel:
        return index % self.device.camera_cols, index // self.device.camera_cols

    def transport(self, camera_pixel: Pixel) -> PixelTransport:
        return self.transports.get(tuple(camera_pixel), PixelTransport())

    @cached_property
    def transport_matrix(self) -> sparse.csr_matrix:
        """Sparse LTC, shape (camera pixels, M*N), rows camera row-major, columns projector row-major."""
        rows, cols, vals = [], [], []
        for pixel in sorted(self.transports, key=lambda p: (p[1], p[0])):
            r, c, v = _pixel_triplets(self.transports[pixel], self.device, self.subsurface_width)
            if v.size:
                rows.append(np.full(v.size, self.pixel_index(pixel), dtype=np.int64))
                cols.append(r * self.device.M + c)
                vals.append(v)
        shape = (self.device.camera_pixel_count, self.device.M * self.device.N)
        if not vals:
            return sparse.csr_matrix(shape)
        matrix = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape
        )
        logger.info("Scene %s: transport matrix with %d nonzeros", self.scene_id, matrix.nnz)
        return matrix


def _lobe_patch(lobe: Lobe, extra_pad: int) -> Tuple[int, int, np.ndarray]:
    """Rasterize one lobe into a local patch. Returns (row0, col0, patch)."""
    half = int(math.ceil(TRUNCATE_SIGMAS * lobe.radius)) + extra_pad
    cu, cv = lobe.center
    col0 = int(math.floor(cu)) - half
    row0 = int(math.floor(cv)) - half
    size = 2 * half + 2
    vv, uu = np.mgrid[row0:row0 + size, col0:col0 + size].astype(np.float64)
    d2 = (uu - cu) ** 2 + (vv - cv) ** 2
    patch = lobe.amplitude * np.exp(-d2 / (2.0 * lobe.radius ** 2))
    patch[d2 > (TRUNCATE_SIGMAS * lobe.radius) ** 2] = 0.0
    return row0, col0, patch


def _pixel_triplets(
    transport: PixelTransport,
    device: DeviceSpec,
    subsurface_width: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzero (row, col, value) entries of one pixel's PTI inside the projector raster."""
    lobes = transport.lobes
    empty = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0))
    if not lobes:
        return empty

    pad = int(math.ceil(TRUNCATE_SIGMAS * subsurface_width)) if subsurface_width > 0 else 0
    patches = [_lobe_patch(lobe, pad) for lobe in lobes]
    row0 = min(p[0] for p in patches)
    col0 = min(p[1] for p in patches)
    row1 = max(p[0] + p[2].shape[0] for p in patches)
    col1 = max(p[1] + p[2].shape[1] for p in patches)
    canvas = np.zeros((row1 - row0, col1 - col0))
    for r, c, patch in patches:
        canvas[r - row0:r - row0 + patch.shape[0], c - col0:c - col0 + patch.shape[1]] += patch

    if subsurface_width > 0:
        canvas = gaussian_filter(canvas, sigma=subsurface_width, mode="constant", truncate=TRUNCATE_SIGMAS)

    rr, cc = np.nonzero(canvas > 0)
    rows = rr + row0
    cols = cc + col0
    inside = (rows >= 0) & (rows < device.N) & (cols >= 0) & (cols < device.M)
    return rows[inside].astype(np.int64), cols[inside].astype(np.int64), canvas[rr[inside], cc[inside]]


def rasterize_ltc(scene: SceneModel, camera_pixel: Pixel) -> np.ndarray:
    """
    Dense pixel transport image h(u', v') of one camera pixel, shape (N, M).

    Sum of the direct lobe and all speckles, spread by the subsurface kernel
    when the scene has one. Empty pixels give an all-zero image.
    """
    device = scene.device
    image = np.zeros((device.N, device.M))
    rows, cols, vals = _pixel_triplets(scene.transport(camera_pixel), device, scene.subsurface_width)
    np.add.at(image, (rows, cols), vals)
    return image


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _ray_plane(origin, direction, point, normal) -> Optional[np.ndarray]:
    denom = float(direction @ normal)
    if abs(denom) < 1e-12:
        return None
    t = float((point - origin) @ normal) / denom
    return origin + t * direction if t > 0 else None


def _ray_sphere(origin, direction, center, radius) -> Optional[np.ndarray]:
    oc = origin - center
    b = float(direction @ oc)
    c = float(oc @ oc) - radius ** 2
    disc = b * b - c
    if disc < 0:
        return None
    t = -b - math.sqrt(disc)
    return origin + t * direction if t > 0 else None


def _inside(device: DeviceSpec, uv, margin: float) -> bool:
    return margin <= uv[0] <= device.M - 1 - margin and margin <= uv[1] <= device.N - 1 - margin


def surface_transports(
    rig: StereoRig,
    surface: Dict[str, Any],
    radius: float,
    amplitude: float,
) -> Dict[Pixel, PixelTransport]:
    """
    Direct lobes for every camera pixel whose ray hits the surface and whose
    projector correspondence lies inside the raster.

    surface: {"type": "plane", "point": [...], "normal": [...]} or
             {"type": "sphere", "center": [...], "diameter_mm": d}
    """
    kind = surface.get("type", "plane")
    device = rig.device
    margin = TRUNCATE_SIGMAS * radius
    out: Dict[Pixel, PixelTransport] = {}
    for v in range(device.camera_rows):
        for u in range(device.camera_cols):
            origin, direction = rig.camera_ray((u, v))
            if kind == "plane":
                hit = _ray_plane(
                    origin, direction,
                    np.asarray(surface.get("point", [0.0, 0.0, 500.0]), dtype=np.float64),
                    np.asarray(surface.get("normal", [0.0, 0.0, 1.0]), dtype=np.float64),
                )
            elif kind == "sphere":
                hit = _ray_sphere(
                    origin, direction,
                    np.asarray(surface["center"], dtype=np.float64),
                    float(surface["diameter_mm"]) / 2.0,
                )
            else:
                raise ValueError(f"Unknown surface type {kind!r}")
            if hit is None:
                continue
            uv = rig.project_projector(hit)
            if not _inside(device, uv, margin):
                continue
            out[(u, v)] = PixelTransport(
                direct=Lobe((float(uv[0]), float(uv[1])), amplitude, radius),
                truth=(float(hit[0]), float(hit[1]), float(hit[2])),
            )
    logger.info("Surface %s: %d lit camera pixels", kind, len(out))
    return out


def add_offset_speckles(
    transports: Dict[Pixel, PixelTransport],
    device: DeviceSpec,
    rng: np.random.Generator,
    du_range: Tuple[float, float] = (0.0, 0.0),
    dv_range: Tuple[float, float] = (0.0, 0.0),
    amplitude: float = 0.5,
    radius: float = 1.5,
    count: int = 1,
    random_sign: bool = True,
) -> None:
    """
    Add `count` speckles per lit pixel, offset from the direct lobe by a
    magnitude drawn uniformly from du_range / dv_range. dv_range = (0, 0)
    keeps the speckle on the epipolar line (inter-reflection along the
    baseline); du_range = (0, 0) with a small dv gives a speckle collinear
    with the direct lobe along theta = 90 deg.
    """
    margin = TRUNCATE_SIGMAS * radius
    for pixel in sorted(transports, key=lambda p: (p[1], p[0])):
        transport = transports[pixel]
        if transport.direct is None:
            continue
        cu, cv = transport.direct.center
        for _ in range(count):
            du = rng.uniform(*du_range)
            dv = rng.uniform(*dv_range)
            if random_sign:
                du *= rng.choice((-1.0, 1.0))
                dv *= rng.choice((-1.0, 1.0))
            center = (cu + du, cv + dv)
            if not _inside(device, center, margin):
                center = (cu - du, cv - dv)
                if not _inside(device, center, margin):
                    continue
            transport.speckles.append(Lobe(center, amplitude, radius))


def _explicit_lobes(transports: Dict[Pixel, PixelTransport], entries: List[Dict[str, Any]]) -> None:
    for entry in entries:
        pixel = tuple(int(x) for x in entry["pixel"])
        lobe = Lobe(tuple(float(x) for x in entry["center"]), float(entry["amplitude"]), float(entry["radius"]))
        transport = transports.setdefault(pixel, PixelTransport())
        if entry.get("kind", "speckle") == "direct":
            transport.direct = lobe
        else:
            transport.speckles.append(lobe)


def scene_from_dict(data: Dict[str, Any]) -> SceneModel:
    """Build a scene from its YAML mapping."""
    try:
        device = DeviceSpec(**data["device"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"Scene file needs a valid 'device' section: {exc}") from exc
    rig = StereoRig.from_dict(device, data["rig"]) if "rig" in data else None
    meta = data.get("scene", {})
    rng = np.random.default_rng(int(meta.get("seed", 0)))

    transports: Dict[Pixel, PixelTransport] = {}
    surface = data.get("surface")
    if surface and surface.get("type", "none") != "none":
        if rig is None:
            raise ValueError("A surface generator needs a 'rig' section")
        direct = data.get("direct", {})
        transports = surface_transports(
            rig, surface,
            radius=float(direct.get("radius_px", 1.5)),
            amplitude=float(direct.get("amplitude", 1.0)),
        )
    for speckle in data.get("speckles", []):
        add_offset_speckles(
            transports, device, rng,
            du_range=tuple(speckle.get("du_px", (0.0, 0.0))),
            dv_range=tuple(speckle.get("dv_px", (0.0, 0.0))),
            amplitude=float(speckle.get("amplitude", 0.5)),
            radius=float(speckle.get("radius_px", 1.5)),
            count=int(speckle.get("count", 1)),
            random_sign=bool(speckle.get("random_sign", True)),
        )
    _explicit_lobes(transports, data.get("lobes", []))

    return SceneModel(
        device=device,
        transports=transports,
        subsurface_width=float(data.get("subsurface_width_px", 0.0)),
        ambient=float(data.get("ambient", 0.0)),
        noise_sigma=float(data.get("noise_sigma", 0.0)),
        rig=rig,
        scene_id=str(meta.get("id", "scene")),
        seed=int(meta.get("seed", 0)),
        surface=dict(surface) if surface else None,
    )


def load_scene(path: Union[str, Path]) -> SceneModel:
    """
    Raises:
        FileNotFoundError: missing scene file.
        ValueError: malformed scene description.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scene file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ValueError(f"Scene file {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"Scene file {path} must contain a mapping")
    return scene_from_dict(data)
