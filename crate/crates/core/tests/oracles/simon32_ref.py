"""SIMON32/64 reference, written from the cipher's design document.

The 64-bit key integer holds words k3 k2 k1 k0, k0 least significant.
"""

Z0 = "11111010001001010110000111001101111101000100101011000011100110"
M = 0xFFFF


def rol(x, r):
    return ((x << r) | (x >> (16 - r))) & M


def ror(x, r):
    return ((x >> r) | (x << (16 - r))) & M


def schedule(key):
    k = [(key >> (16 * i)) & M for i in range(4)]
    for i in range(4, 32):
        tmp = ror(k[i - 1], 3) ^ k[i - 3]
        tmp ^= ror(tmp, 1)
        k.append((~k[i - 4] & M) ^ tmp ^ int(Z0[(i - 4) % 62]) ^ 3)
    return k


def encrypt(pt, key):
    x, y = pt >> 16, pt & M
    for rk in schedule(key):
        x, y = y ^ (rol(x, 1) & rol(x, 8)) ^ rol(x, 2) ^ rk, x
    return (x << 16) | y


def decrypt(ct, key):
    x, y = ct >> 16, ct & M
    for rk in reversed(schedule(key)):
        x, y = y, x ^ (rol(y, 1) & rol(y, 8)) ^ rol(y, 2) ^ rk
    return (x << 16) | y


if __name__ == "__main__":
    ct = encrypt(0x65656877, 0x1918111009080100)
    assert ct == 0xC69BE9BB, hex(ct)
    assert decrypt(ct, 0x1918111009080100) == 0x65656877
    print("simon32/64 reference ok")
