void axpby(int n, double alpha, double beta, const double *x, double *y)
{
#pragma acc parallel loop gang vector \
    copyin(x[0:n]) \
    copy(y[0:n])
    for (int i = 0; i < n; i++) {
        y[i] = alpha * x[i] + beta * y[i];
    }
}
