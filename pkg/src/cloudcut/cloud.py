"""Cloud-side model: providers, regions, pricing, affinities, user profiles.

A cloud provider owns a disjoint set of regions.  Per-user, per-region
affinities measure expected delivery quality: the download affinity of (v, s)
scores how well region s serves content consumed near v, the upload affinity
scores how well s ingests content published near v.  Affinities default to 0
where unstated.

From these the model derives the two hosting indices of a user u for cloud c:

  local_download_index(u, c): sum over u's friends v of the best download
      affinity v has to any region of c  (how well c serves u's audience)
  local_upload_index(u, c):   best upload affinity of u to any region of c,
      scaled by u's upload volume        (how well c ingests u's content)

and the hosting preference, their blend:

  preference(u, c) = download_index + blend_weight(u) * upload_index

normalized_preference rescales each user's preferences to sum to 1 over the
clouds (uniform when all are zero), so per-user satisfaction is comparable
across users and model scales.
"""

from __future__ import annotations

import csv
import math

import numpy as np
from scipy import sparse

from .errors import ParseError, ValidationError


class PricingMatrix:
    """Per-GB transfer price between clouds; entry (c, d) prices traffic c->d.

    Diagonal entries price intra-cloud replication (usually 0).
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("pricing matrix must be square")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValidationError("prices must be finite and non-negative")
        self._m = m
        self._m.setflags(write=False)

    @property
    def matrix(self):
        return self._m

    @property
    def n_clouds(self):
        return self._m.shape[0]

    def rate(self, src_cloud, dst_cloud):
        return float(self._m[src_cloud, dst_cloud])

    @classmethod
    def uniform(cls, n_clouds, inter_price=1.0, intra_price=0.0):
        m = np.full((n_clouds, n_clouds), float(inter_price))
        np.fill_diagonal(m, float(intra_price))
        return cls(m)

    @classmethod
    def from_csv(cls, path):
        """Parse a matrix CSV with cloud labels as header row and column.

        Returns (cloud_labels, PricingMatrix); row label order defines cloud
        id order.
        """
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) < 2:
            raise ParseError("pricing matrix needs a header row of cloud labels", 1)
        header = [c.strip() for c in rows[0][1:]]
        n = len(header)
        if len(set(header)) != n:
            raise ParseError("duplicate cloud label in pricing header", 1)
        m = np.zeros((n, n))
        row_labels = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != n + 1:
                raise ParseError(f"expected {n + 1} fields, got {len(row)}", lineno)
            row_labels.append(row[0].strip())
            for j, cell in enumerate(row[1:]):
                try:
                    m[lineno - 2, j] = float(cell)
                except ValueError:
                    raise ParseError(f"bad price {cell!r}", lineno) from None
        if row_labels != header:
            raise ParseError("pricing row labels must match header order", len(rows))
        return tuple(header), cls(m)

    def to_csv(self, path, cloud_labels):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["cloud"] + list(cloud_labels))
            for i, lab in enumerate(cloud_labels):
                wr.writerow([lab] + [repr(float(x)) for x in self._m[i]])


class AffinityTable:
    """Dense per-(user, region) download/upload affinities.

    Rows are users, columns regions; entries default to 0.  Built once and
    treated as immutable.
    """

    def __init__(self, download, upload):
        d = np.asarray(download, dtype=np.float64)
        u = np.asarray(upload, dtype=np.float64)
        if d.shape != u.shape or d.ndim != 2:
            raise ValidationError("affinity arrays must share one (users x regions) shape")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(u))):
            raise ValidationError("affinities must be finite")
        if np.any(d < 0) or np.any(u < 0):
            raise ValidationError("affinities must be non-negative")
        self.download = d
        self.upload = u
        for arr in (self.download, self.upload):
            arr.setflags(write=False)

    @property
    def n_users(self):
        return self.download.shape[0]

    @property
    def n_regions(self):
        return self.download.shape[1]

    def download_affinity(self, user, region):
        return float(self.download[user, region])

    def upload_affinity(self, user, region):
        return float(self.upload[user, region])

    @classmethod
    def from_entries(cls, n_users, n_regions, entries):
        """entries: iterable of (user_id, region_id, download, upload)."""
        d = np.zeros((n_users, n_regions))
        u = np.zeros((n_users, n_regions))
        for user, region, dl, ul in entries:
            d[user, region] = dl
            u[user, region] = ul
        return cls(d, u)

    @classmethod
    def from_coordinates(cls, user_xy, region_xy, scale):
        """Distance-decayed affinities: 1 / (1 + dist / scale).

        A user sitting exactly on a region gets affinity 1 there; affinity
        halves at distance == scale.  Download and upload use the same decay.
        """
        if scale <= 0:
            raise ValidationError("scale must be positive")
        user_xy = np.asarray(user_xy, dtype=np.float64)
        region_xy = np.asarray(region_xy, dtype=np.float64)
        diff = user_xy[:, None, :] - region_xy[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        aff = 1.0 / (1.0 + dist / scale)
        return cls(aff, aff.copy())


def geo_affinity(distance, scale):
    """Scalar helper: affinity of a user at the given distance from a region."""
    if scale <= 0:
        raise ValidationError("scale must be positive")
    if distance < 0:
        raise ValidationError("distance must be non-negative")
    return 1.0 / (1.0 + distance / scale)


class CloudModel:
    """Everything cloud-side the optimizer needs, bound to one user universe.

    Holds cloud/region label tables, the region->cloud map, transfer pricing,
    the affinity table, and per-user profiles (upload volume, blend weight,
    optional home region).  Precomputes, per user and cloud, the best download
    and upload affinity over the cloud's regions.
    """

    def __init__(self, cloud_labels, region_labels, region_cloud, pricing,
                 affinity, upload_volume, blend_weight, home_region=None):
        self.cloud_labels = tuple(cloud_labels)
        self.region_labels = tuple(region_labels)
        if len(set(self.cloud_labels)) != len(self.cloud_labels):
            raise ValidationError("cloud labels must be unique")
        if len(set(self.region_labels)) != len(self.region_labels):
            raise ValidationError("region labels must be unique")
        self.region_cloud = np.asarray(region_cloud, dtype=np.int64)
        if self.region_cloud.shape != (len(self.region_labels),):
            raise ValidationError("region_cloud must map every region")
        if self.region_cloud.size and (
            self.region_cloud.min() < 0 or self.region_cloud.max() >= len(self.cloud_labels)
        ):
            raise ValidationError("region mapped to unknown cloud")
        if pricing.n_clouds != len(self.cloud_labels):
            raise ValidationError("pricing matrix size must match cloud count")
        self.pricing = pricing
        if affinity.n_regions != len(self.region_labels):
            raise ValidationError("affinity table region count mismatch")
        self.affinity = affinity

        n_users = affinity.n_users
        self.upload_volume = np.asarray(upload_volume, dtype=np.float64)
        self.blend_weight = np.asarray(blend_weight, dtype=np.float64)
        if self.upload_volume.shape != (n_users,) or self.blend_weight.shape != (n_users,):
            raise ValidationError("profile arrays must cover every user")
        if np.any(self.upload_volume < 0) or np.any(self.blend_weight < 0):
            raise ValidationError("profile values must be non-negative")
        if home_region is None:
            home_region = np.full(n_users, -1, dtype=np.int64)
        self.home_region = np.asarray(home_region, dtype=np.int64)
        if self.home_region.shape != (n_users,):
            raise ValidationError("home_region must cover every user")

        # per-cloud best affinity, the max over the cloud's regions (0 if none)
        C = len(self.cloud_labels)
        self.best_download = np.zeros((n_users, C))
        self.best_upload = np.zeros((n_users, C))
        for c in range(C):
            cols = np.nonzero(self.region_cloud == c)[0]
            if cols.size:
                self.best_download[:, c] = affinity.download[:, cols].max(axis=1)
                self.best_upload[:, c] = affinity.upload[:, cols].max(axis=1)
        for arr in (self.upload_volume, self.blend_weight, self.home_region,
                    self.best_download, self.best_upload):
            arr.setflags(write=False)

    @property
    def n_clouds(self):
        return len(self.cloud_labels)

    @property
    def n_regions(self):
        return len(self.region_labels)

    @property
    def n_users(self):
        return self.affinity.n_users

    def cloud_id(self, label):
        try:
            return self.cloud_labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown cloud label {label!r}") from None

    def region_id(self, label):
        try:
            return self.region_labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown region label {label!r}") from None

    def regions_of_cloud(self, c):
        return np.nonzero(self.region_cloud == c)[0]

    def restrict(self, n_active):
        """Model over the first n_active clouds only (deterministic order).

        Regions of dropped clouds vanish; users homed there keep home -1.
        """
        if not 1 <= n_active <= self.n_clouds:
            raise ValidationError("n_active out of range")
        if n_active == self.n_clouds:
            return self
        keep_regions = np.nonzero(self.region_cloud < n_active)[0]
        region_map = {int(r): i for i, r in enumerate(keep_regions)}
        home = np.array([region_map.get(int(r), -1) for r in self.home_region], dtype=np.int64)
        return CloudModel(
            self.cloud_labels[:n_active],
            tuple(self.region_labels[r] for r in keep_regions),
            self.region_cloud[keep_regions],
            PricingMatrix(self.pricing.matrix[:n_active, :n_active]),
            AffinityTable(self.affinity.download[:, keep_regions],
                          self.affinity.upload[:, keep_regions]),
            self.upload_volume,
            self.blend_weight,
            home,
        )


def default_profiles(graph, blend=1.0):
    """Default per-user profile arrays: upload volume is the mean outgoing
    edge weight (a proxy for how much of u's content propagates per follower),
    blend weight is constant."""
    n = graph.n_users
    vol = np.array([graph.mean_out_weight(u) for u in range(n)])
    return vol, np.full(n, float(blend))


# -- preference indices ----------------------------------------------------

def local_download_index(u, c, graph, model):
    """Sum over u's friends of their best download affinity to cloud c."""
    fr = graph.friends(u)
    if fr.size == 0:
        return 0.0
    return float(model.best_download[fr, c].sum())


def local_upload_index(u, c, model):
    """Best upload affinity of u to cloud c, scaled by u's upload volume."""
    return float(model.best_upload[u, c] * model.upload_volume[u])


def preference(u, c, graph, model):
    """Hosting preference of user u for cloud c (download + blended upload)."""
    return local_download_index(u, c, graph, model) + float(model.blend_weight[u]) * local_upload_index(u, c, model)


def normalized_preference(u, c, graph, model):
    """Preference rescaled so each user's values sum to 1 over the clouds."""
    row = np.array([preference(u, d, graph, model) for d in range(model.n_clouds)])
    total = row.sum()
    if total <= 0.0:
        return 1.0 / model.n_clouds
    return float(row[c] / total)


def preference_matrix(graph, model, normalized=False):
    """(n_users x n_clouds) preference table, optionally row-normalized.

    Rows of all-zero preference normalize to the uniform row 1/n_clouds.
    """
    if model.n_users != graph.n_users:
        raise ValidationError("model and graph disagree on user count")
    off, nbr, _, _ = graph.friend_csr()
    n = graph.n_users
    adj = sparse.csr_matrix(
        (np.ones(nbr.size), nbr, off), shape=(n, n)
    )
    download = adj @ model.best_download
    upload = model.best_upload * model.upload_volume[:, None]
    psi = download + model.blend_weight[:, None] * upload
    if not normalized:
        return psi
    totals = psi.sum(axis=1)
    out = np.full_like(psi, 1.0 / model.n_clouds)
    pos = totals > 0
    out[pos] = psi[pos] / totals[pos, None]
    return out


# -- tabular loaders -------------------------------------------------------

def load_regions(path):
    """Headerless CSV region_label,cloud_label[,x,y].

    Returns (cloud_labels, region_labels, region_cloud, region_xy or None).
    Cloud ids follow first appearance; coordinates must be all-or-none.
    """
    cloud_labels, region_labels, region_cloud, coords = [], [], [], []
    cloud_ids = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if len(row) not in (2, 4):
                raise ParseError(f"expected 2 or 4 fields, got {len(row)}", lineno)
            region, cloud = row[0].strip(), row[1].strip()
            if not region or not cloud:
                raise ParseError("empty label", lineno)
            if region in region_labels:
                raise ParseError(f"duplicate region {region!r}", lineno)
            if cloud not in cloud_ids:
                cloud_ids[cloud] = len(cloud_labels)
                cloud_labels.append(cloud)
            region_labels.append(region)
            region_cloud.append(cloud_ids[cloud])
            if len(row) == 4:
                try:
                    coords.append((float(row[2]), float(row[3])))
                except ValueError:
                    raise ParseError("bad coordinate", lineno) from None
    if coords and len(coords) != len(region_labels):
        raise ParseError("coordinates must be given for all regions or none")
    xy = np.array(coords) if coords else None
    return tuple(cloud_labels), tuple(region_labels), np.array(region_cloud, dtype=np.int64), xy


def load_affinities(path, graph, region_labels, ignore_unknown_users=False):
    """Headerless CSV user_label,region_label,download,upload -> AffinityTable.

    Unlisted pairs default to 0.  Unknown labels raise ParseError, unless
    ignore_unknown_users is set (rows for users outside the graph are
    dropped, which a sampled graph needs when the file covers its parent).
    """
    region_ids = {lab: i for i, lab in enumerate(region_labels)}
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
            ulab, rlab = row[0].strip(), row[1].strip()
            try:
                u = graph.user_id(ulab)
            except ValidationError:
                if ignore_unknown_users:
                    continue
                raise ParseError(f"unknown user {ulab!r}", lineno) from None
            if rlab not in region_ids:
                raise ParseError(f"unknown region {rlab!r}", lineno)
            try:
                dl, ul = float(row[2]), float(row[3])
            except ValueError:
                raise ParseError("bad affinity value", lineno) from None
            entries.append((u, region_ids[rlab], dl, ul))
    return AffinityTable.from_entries(graph.n_users, len(region_labels), entries)


def load_profiles(path, graph, region_labels=None, ignore_unknown_users=False):
    """Headerless CSV user_label,upload_volume,blend_weight[,region_label].

    Unlisted users fall back to defaults (mean outgoing weight, blend 1).
    Returns (upload_volume, blend_weight, home_region) arrays.
    """
    vol, blend = default_profiles(graph)
    vol = vol.copy()
    blend = blend.copy()
    home = np.full(graph.n_users, -1, dtype=np.int64)
    region_ids = {lab: i for i, lab in enumerate(region_labels or ())}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if len(row) not in (3, 4):
                raise ParseError(f"expected 3 or 4 fields, got {len(row)}", lineno)
            try:
                u = graph.user_id(row[0].strip())
            except ValidationError:
                if ignore_unknown_users:
                    continue
                raise ParseError(f"unknown user {row[0]!r}", lineno) from None
            try:
                vol[u] = float(row[1])
                blend[u] = float(row[2])
            except ValueError:
                raise ParseError("bad profile value", lineno) from None
            if vol[u] < 0 or blend[u] < 0 or not (math.isfinite(vol[u]) and math.isfinite(blend[u])):
                raise ParseError("profile values must be finite and non-negative", lineno)
            if len(row) == 4:
                rlab = row[3].strip()
                if rlab not in region_ids:
                    raise ParseError(f"unknown region {rlab!r}", lineno)
                home[u] = region_ids[rlab]
    return vol, blend, home
