import struct
import zlib

import numpy as np
import pytest

from crossband.errors import ImageIOError
from crossband.image_io import read_image, write_image


def _png(path, chunks):
    blob = b"\x89PNG\r\n\x1a\n"
    for ctype, payload in chunks:
        blob += struct.pack(">I", len(payload)) + ctype + payload
        blob += struct.pack(">I", zlib.crc32(payload, zlib.crc32(ctype)))
    path.write_bytes(blob)


def _ihdr(w, h, bitdepth, colortype, interlace=0):
    return struct.pack(">IIBBBBB", w, h, bitdepth, colortype, 0, 0, interlace)


def test_write_read_8bit_png_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.random((9, 13))
    p = tmp_path / "img.png"
    write_image(p, img, bitdepth=8)
    back = read_image(p)
    assert back.shape == img.shape
    assert np.max(np.abs(back - img)) <= 1.0 / (2 * 255)


def test_write_read_16bit_roundtrips(tmp_path):
    rng = np.random.default_rng(1)
    gray = rng.random((7, 5))
    color = rng.random((6, 4, 3))
    bound = 1.0 / (2 * 65535)
    for name, img in (("g.png", gray), ("c.png", color),
                      ("g.pgm", gray), ("c.ppm", color)):
        p = tmp_path / name
        write_image(p, img, bitdepth=16)
        back = read_image(p)
        assert back.shape == img.shape
        assert np.max(np.abs(back - img)) <= bound


def test_pgm_single_pixel_255(tmp_path):
    p = tmp_path / "one.pgm"
    p.write_bytes(b"P5\n1 1\n255\n\xff")
    img = read_image(p)
    assert img.shape == (1, 1)
    assert img[0, 0] == 1.0


def test_integer_code_mapping_is_exact(tmp_path):
    p = tmp_path / "codes.pgm"
    codes = np.arange(256, dtype=np.uint8).reshape(16, 16)
    p.write_bytes(b"P5\n16 16\n255\n" + codes.tobytes())
    img = read_image(p)
    assert np.array_equal(img, codes.astype(np.float64) / 255)


def test_write_rounds_half_up(tmp_path):
    # 10.5/255 sits exactly between codes 10 and 11
    p = tmp_path / "half.pgm"
    write_image(p, np.full((1, 1), 10.5 / 255))
    assert p.read_bytes()[-1] == 11


def test_pnm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# a comment\n2 1\n# another\n255\n\x00\xff")
    img = read_image(p)
    assert np.array_equal(img, np.array([[0.0, 1.0]]))


def test_ppm_color_roundtrip_8bit(tmp_path):
    rng = np.random.default_rng(2)
    img = rng.random((3, 4, 3))
    p = tmp_path / "c.ppm"
    write_image(p, img)
    assert np.max(np.abs(read_image(p) - img)) <= 1.0 / (2 * 255)


def test_read_missing_file_names_path():
    with pytest.raises(ImageIOError, match="no-such-file"):
        read_image("no-such-file.png")


def test_unsupported_format(tmp_path):
    p = tmp_path / "x.png"
    p.write_bytes(b"GIF89a....")
    with pytest.raises(ImageIOError, match="unsupported"):
        read_image(p)


def test_truncated_png(tmp_path):
    src = tmp_path / "ok.png"
    write_image(src, np.ones((4, 4)))
    broken = tmp_path / "broken.png"
    broken.write_bytes(src.read_bytes()[:-8])
    with pytest.raises(ImageIOError, match="truncated"):
        read_image(broken)


def test_png_crc_mismatch(tmp_path):
    src = tmp_path / "ok.png"
    write_image(src, np.zeros((2, 2)))
    blob = bytearray(src.read_bytes())
    blob[-5] ^= 0xFF  # corrupt IEND CRC
    bad = tmp_path / "bad.png"
    bad.write_bytes(bytes(blob))
    with pytest.raises(ImageIOError, match="CRC"):
        read_image(bad)


def test_png_unsupported_bitdepth(tmp_path):
    p = tmp_path / "b.png"
    raw = zlib.compress(b"\x00\x00")
    _png(p, [(b"IHDR", _ihdr(1, 1, 4, 0)), (b"IDAT", raw), (b"IEND", b"")])
    with pytest.raises(ImageIOError, match="bit depth"):
        read_image(p)


def test_png_unsupported_color_type(tmp_path):
    p = tmp_path / "p.png"
    raw = zlib.compress(b"\x00\x00")
    _png(p, [(b"IHDR", _ihdr(1, 1, 8, 3)), (b"IDAT", raw), (b"IEND", b"")])
    with pytest.raises(ImageIOError, match="color type"):
        read_image(p)


def test_png_interlace_rejected(tmp_path):
    p = tmp_path / "i.png"
    raw = zlib.compress(b"\x00\x00")
    _png(p, [(b"IHDR", _ihdr(1, 1, 8, 0, interlace=1)),
             (b"IDAT", raw), (b"IEND", b"")])
    with pytest.raises(ImageIOError, match="interlaced"):
        read_image(p)


def test_pnm_unsupported_maxval(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P5\n1 1\n100\n\x00")
    with pytest.raises(ImageIOError, match="maxval"):
        read_image(p)


def test_pnm_truncated_body(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(ImageIOError, match="truncated"):
        read_image(p)


def _filter_forward(rows, bpp, ftypes):
    """Independent forward PNG filtering, to exercise the reader's inverse."""
    h, stride = rows.shape
    out = bytearray()
    prior = np.zeros(stride, dtype=np.int64)
    for y in range(h):
        cur = rows[y].astype(np.int64)
        f = ftypes[y % len(ftypes)]
        line = np.zeros(stride, dtype=np.int64)
        for i in range(stride):
            left = cur[i - bpp] if i >= bpp else 0
            up = prior[i]
            ul = prior[i - bpp] if i >= bpp else 0
            if f == 0:
                pred = 0
            elif f == 1:
                pred = left
            elif f == 2:
                pred = up
            elif f == 3:
                pred = (left + up) // 2
            else:
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if (pa <= pb and pa <= pc) else (up if pb <= pc else ul)
            line[i] = (cur[i] - pred) & 0xFF
        out += bytes([f]) + bytes(line.astype(np.uint8))
        prior = cur
    return bytes(out)


@pytest.mark.parametrize("ftypes", [(0,), (1,), (2,), (3,), (4,), (0, 1, 2, 3, 4)])
def test_png_reader_inverts_all_filters(tmp_path, ftypes):
    rng = np.random.default_rng(sum(ftypes) + 10)
    codes = rng.integers(0, 256, size=(6, 5, 3)).astype(np.uint8)
    raw = _filter_forward(codes.reshape(6, -1), bpp=3, ftypes=ftypes)
    p = tmp_path / "f.png"
    _png(p, [(b"IHDR", _ihdr(5, 6, 8, 2)),
             (b"IDAT", zlib.compress(raw)), (b"IEND", b"")])
    img = read_image(p)
    assert np.array_equal(img, codes.astype(np.float64) / 255)


def test_png_16bit_big_endian_samples(tmp_path):
    p = tmp_path / "be.png"
    # single pixel with value 0x0102
    raw = zlib.compress(b"\x00\x01\x02")
    _png(p, [(b"IHDR", _ihdr(1, 1, 16, 0)), (b"IDAT", raw), (b"IEND", b"")])
    img = read_image(p)
    assert img[0, 0] == pytest.approx(0x0102 / 65535, abs=1e-12)


def test_write_rejects_bad_inputs(tmp_path):
    with pytest.raises(ValueError, match="bitdepth"):
        write_image(tmp_path / "x.png", np.zeros((2, 2)), bitdepth=12)
    with pytest.raises(ValueError, match="grayscale"):
        write_image(tmp_path / "x.pgm", np.zeros((2, 2, 3)))
    with pytest.raises(ValueError, match="color"):
        write_image(tmp_path / "x.ppm", np.zeros((2, 2)))
    with pytest.raises(ValueError, match="extension"):
        write_image(tmp_path / "x.tiff", np.zeros((2, 2)))


def test_write_clamps_out_of_range(tmp_path):
    p = tmp_path / "clamp.pgm"
    write_image(p, np.array([[-0.5, 1.5]]))
    assert p.read_bytes()[-2:] == b"\x00\xff"
