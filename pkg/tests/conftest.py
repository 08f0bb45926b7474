import io

from PIL import Image

from fluorplate.imaging import RasterImage


def png_bytes(image: RasterImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.pixels, "RGB").save(buf, "PNG")
    return buf.getvalue()
