"""Series solutions of Laplace's equation on a rectangle by the Daftardar-Gejji--Jafari iteration."""

__version__ = "0.1.0"
