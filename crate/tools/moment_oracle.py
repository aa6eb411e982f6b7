import mpmath as mp, numpy as np
x,w=np.polynomial.legendre.leggauss(20)
T=300.0; h=0.25
i2=i4=0.0
for k in range(int(T/h)):
    a=k*h; m=a+h/2
    for xi,wi in zip(x,w):
        z=float(mp.siegelz(m+h/2*xi)); i2+=wi*h/2*z*z; i4+=wi*h/2*z**4
print(repr(i2),repr(i4))
